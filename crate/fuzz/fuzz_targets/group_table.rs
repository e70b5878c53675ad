#![no_main]

use eqstab::groups::FiniteGroup;
use libfuzzer_sys::fuzz_target;

// First byte picks the order (1..=12); the rest fill the table row by row.
fuzz_target!(|data: &[u8]| {
    let Some((&head, rest)) = data.split_first() else {
        return;
    };
    let order = (head % 12) as usize + 1;
    let table: Vec<usize> = rest.iter().take(order * order).map(|&b| b as usize % (order + 1)).collect();
    let Ok(g) = FiniteGroup::from_table(order, table, None) else {
        return;
    };
    for a in g.elements() {
        assert_eq!(g.mul(a, g.inv(a)), g.identity());
        for b in g.elements() {
            for c in g.elements() {
                assert_eq!(g.mul(g.mul(a, b), c), g.mul(a, g.mul(b, c)));
            }
        }
    }
});
