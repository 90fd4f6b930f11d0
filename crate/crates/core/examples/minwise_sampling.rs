//! Approximately min-wise permutations: samplers and a bottom-k counter.

use intsel::hashing::{family_new, DistinctCounter, KmvDistinct, MinSampler, PermutationBank};

fn main() -> intsel::Result<()> {
    let (family, mut rng) = family_new(10_000, 0.1, 5)?;
    println!("prime {}, independence {}", family.p, family.t);

    let bank = PermutationBank::draw(&family, 1000, &mut rng);
    let mut hits = [0u32; 4];
    for i in 0..bank.len() {
        let mut s = MinSampler::new(bank.member(i));
        for x in 1..=4 {
            s.observe(x);
        }
        hits[s.winner().unwrap() as usize - 1] += 1;
    }
    println!("winner frequencies over 1..=4: {hits:?}");

    let mut kmv = KmvDistinct::new(256, 10_000, 9)?;
    for x in (0..50_000u64).map(|i| i * 7 % 6000) {
        kmv.insert(x);
    }
    println!("bottom-k estimate {:.0} for 6000 distinct ids", kmv.estimate());
    Ok(())
}
