#![no_main]

use eqstab_cli::scenario::Scenario;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    match Scenario::list_from_json(text) {
        Ok(list) => {
            let again = serde_json::to_string(&list).expect("scenarios serialize");
            let back = Scenario::list_from_json(&again).expect("serialized scenarios parse");
            assert_eq!(back.len(), list.len());
            for (a, b) in list.iter().zip(&back) {
                assert_eq!(a.kind, b.kind);
                assert_eq!(a.group, b.group);
                assert_eq!(a.trials, b.trials);
            }
        }
        Err(e) => assert!(e.path.is_empty() || e.path.starts_with('/')),
    }
});
