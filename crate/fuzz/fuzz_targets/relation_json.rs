#![no_main]

use eqstab::relations::{RawSystem, RelationSystem};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(sys) = RelationSystem::from_json(text) else {
        return;
    };
    let raw: RawSystem = serde_json::from_str(text).expect("accepted input is a raw system");
    let out = sys.to_raw(raw.group.clone());
    let again = serde_json::to_string(&out).expect("raw systems serialize");
    let back = RelationSystem::from_json(&again).expect("serialized system parses");
    assert_eq!(back.generators(), sys.generators());
    assert_eq!(back.relations().len(), sys.relations().len());
    let words = |s: &RelationSystem| -> Vec<Vec<Vec<String>>> {
        s.relations()
            .iter()
            .map(|p| p.terms.iter().map(|t| t.word.iter().map(|l| s.letter_name(l)).collect()).collect())
            .collect()
    };
    assert_eq!(words(&back), words(&sys));
});
