use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use meshqa_core::stats::GoldenRole;

use crate::config::{Playlist, StudyItem, SLOTS};

/// What is shown at one presentation slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotItem {
    pub item: StudyItem,
    pub role: Option<GoldenRole>,
}

/// Seeded presentation order: shuffled test items with the poor, high and second-repeat
/// golden units inserted so that no golden slot (the first repeat included) is slot 0 or
/// adjacent to another golden slot, and the first repeat comes before the second.
pub fn presentation_order(playlist: &Playlist, seed: u64) -> Vec<SlotItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut test = playlist.test.clone();
        test.shuffle(&mut rng);
        let mut golden_slots = [0usize; 3];
        for s in golden_slots.iter_mut() {
            *s = rng.random_range(1..SLOTS);
        }
        let [poor, high, rep2] = golden_slots;
        if poor == high || poor == rep2 || high == rep2 {
            continue;
        }
        let mut order = Vec::with_capacity(SLOTS);
        let mut rest = test.into_iter();
        for slot in 0..SLOTS {
            let (item, role) = if slot == poor {
                (playlist.golden.poor.clone(), Some(GoldenRole::Poor))
            } else if slot == high {
                (playlist.golden.high.clone(), Some(GoldenRole::High))
            } else if slot == rep2 {
                let rep = playlist.test.iter().find(|t| t.stimulus_id == playlist.golden.repeated).expect("validated");
                (rep.clone(), Some(GoldenRole::Rep2))
            } else {
                let t = rest.next().expect("30 test items fill the other slots");
                let role = (t.stimulus_id == playlist.golden.repeated).then_some(GoldenRole::Rep1);
                (t, role)
            };
            order.push(SlotItem { item, role });
        }
        if order_is_valid(&order) {
            return order;
        }
    }
}

/// Checks the golden-slot placement rules.
pub fn order_is_valid(order: &[SlotItem]) -> bool {
    let slots: Vec<usize> = order.iter().enumerate().filter(|(_, s)| s.role.is_some()).map(|(i, _)| i).collect();
    let pos = |r: GoldenRole| order.iter().position(|s| s.role == Some(r));
    let (Some(rep1), Some(rep2)) = (pos(GoldenRole::Rep1), pos(GoldenRole::Rep2)) else {
        return false;
    };
    slots.len() == 4 && slots[0] != 0 && slots.windows(2).all(|w| w[1] - w[0] > 1) && rep1 < rep2
}
