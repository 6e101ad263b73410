use gsp_regret::auction::*;
use proptest::prelude::*;

const CURVE: [f64; 5] = [1.0, 0.7, 0.5, 0.35, 0.25];

fn params_strategy() -> impl Strategy<Value = AuctionParams> {
    (
        prop::collection::vec((200_000u64..2_000_000, 0.0f64..=1.0, 0u64..2_000_000), 1..7),
        0u64..800_000,
        0u64..800_000,
        1usize..=5,
        0usize..=5,
    )
        .prop_map(|(bidders, r, extra, len, slots)| {
            let slots = slots.min(len);
            AuctionParams {
                entries: bidders
                    .into_iter()
                    .enumerate()
                    .map(|(i, (s, g, b))| BidderEntry {
                        id: BidderId(i as u64 + 1),
                        score: Score::from_ppm(s).unwrap(),
                        quality: g,
                        bid: Money::from_micros(b),
                    })
                    .collect(),
                rank_reserve: RankScore::new(r as f64 / 1e6).unwrap(),
                mainline_reserve: RankScore::new((r + extra) as f64 / 1e6).unwrap(),
                mainline_cap: slots,
                position_curve: CURVE[..len].to_vec(),
                mainline_slots: slots,
            }
        })
}

proptest! {
    #[test]
    fn allocation_is_consistent_and_respects_reserves(p in params_strategy()) {
        let alloc = rank_and_allocate(&p).unwrap();
        for (j, occ) in alloc.bidder_at.iter().enumerate() {
            if let Some(id) = occ {
                prop_assert_eq!(alloc.position(*id), Some(j));
                let q = p.entry(*id).unwrap().rank_score();
                prop_assert!(q >= p.rank_reserve);
                if p.is_mainline(j) {
                    prop_assert!(q >= p.mainline_reserve);
                }
            }
        }
        for (id, pos) in &alloc.position_of {
            if let Some(j) = pos {
                prop_assert_eq!(alloc.occupant(*j), Some(*id));
            }
        }
        prop_assert_eq!(rank_and_allocate(&p).unwrap(), alloc);
    }

    #[test]
    fn price_never_exceeds_own_bid(p in params_strategy()) {
        let alloc = rank_and_allocate(&p).unwrap();
        for e in &p.entries {
            if alloc.position(e.id).is_some() {
                let cpc = cost_per_click(e.id, &alloc, &p).unwrap();
                prop_assert!(cpc <= e.bid.as_f64() + 1e-12, "{} > {}", cpc, e.bid.as_f64());
            }
        }
    }

    #[test]
    fn outcomes_are_monotone_in_own_bid(p in params_strategy(), who in 0usize..6) {
        let id = p.entries[who % p.entries.len()].id;
        let mut prev = Outcome::default();
        for micros in (0..=2_500_000u64).step_by(12_500) {
            let o = outcome(&p.with_bid(id, Money::from_micros(micros)).unwrap(), id).unwrap();
            prop_assert!(o.click_probability >= prev.click_probability);
            prop_assert!(o.payment >= prev.payment - 1e-12);
            prev = o;
        }
    }

    #[test]
    fn player_view_matches_full_auction(p in params_strategy(), who in 0usize..6, bids in prop::collection::vec(0u64..2_500_000, 20)) {
        let id = p.entries[who % p.entries.len()].id;
        let fast = PlayerAuction::new(&p, id).unwrap();
        for micros in bids {
            let bid = Money::from_micros(micros);
            let slow = outcome(&p.with_bid(id, bid).unwrap(), id).unwrap();
            let quick = fast.outcome(bid);
            prop_assert!((slow.click_probability - quick.click_probability).abs() <= 1e-15);
            prop_assert!((slow.payment - quick.payment).abs() <= 1e-12);
        }
    }
}
