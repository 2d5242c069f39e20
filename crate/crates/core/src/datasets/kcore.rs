use crate::datasets::{Interaction, InteractionMatrix};
use crate::error::{Error, Result};

/// Repeatedly drops users and items with fewer than `k` interactions until
/// every remaining row and column has at least `k`. Survivors are
/// renumbered densely, preserving their relative order and raw keys.
pub fn k_core(interactions: &InteractionMatrix, k: usize) -> Result<InteractionMatrix> {
    if k == 0 {
        return Err(Error::input("k-core needs k >= 1"));
    }
    let mut alive_users = vec![true; interactions.n_users()];
    let mut alive_items = vec![true; interactions.n_items()];
    loop {
        let mut user_deg = vec![0usize; interactions.n_users()];
        let mut item_deg = vec![0usize; interactions.n_items()];
        for e in interactions.entries() {
            if alive_users[e.user as usize] && alive_items[e.item as usize] {
                user_deg[e.user as usize] += 1;
                item_deg[e.item as usize] += 1;
            }
        }
        let mut changed = false;
        for (alive, &d) in alive_users.iter_mut().zip(&user_deg) {
            if *alive && d < k {
                *alive = false;
                changed = true;
            }
        }
        for (alive, &d) in alive_items.iter_mut().zip(&item_deg) {
            if *alive && d < k {
                *alive = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let remap = |alive: &[bool]| -> Vec<Option<u32>> {
        let mut next = 0u32;
        alive
            .iter()
            .map(|&a| {
                a.then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    };
    let user_map = remap(&alive_users);
    let item_map = remap(&alive_items);
    let entries: Vec<Interaction> = interactions
        .entries()
        .iter()
        .filter_map(|e| {
            Some(Interaction {
                user: user_map[e.user as usize]?,
                item: item_map[e.item as usize]?,
                timestamp: e.timestamp,
            })
        })
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptyCore { k });
    }
    let user_keys = interactions
        .user_keys()
        .iter()
        .zip(&alive_users)
        .filter(|(_, &a)| a)
        .map(|(key, _)| key.clone())
        .collect();
    let item_keys = interactions
        .item_keys()
        .iter()
        .zip(&alive_items)
        .filter(|(_, &a)| a)
        .map(|(key, _)| key.clone())
        .collect();
    Ok(InteractionMatrix::from_parts(entries, user_keys, item_keys))
}
