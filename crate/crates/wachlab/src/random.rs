use std::sync::Arc;

use rand::Rng;

use crate::cyclo::{CycloSeries, RingParams};
use crate::descent::multi_indices;
use crate::relative::{Flavor, Key, RelBase, RelPD, RelParams};

fn modulus(ring: &RingParams) -> i64 {
    (ring.p as i64).saturating_pow(ring.prec.min(30))
}

/// Series with `len` random coefficients in `[0, p^N)`.
pub fn series<R: Rng>(rng: &mut R, ring: &Arc<RingParams>, len: usize) -> CycloSeries {
    let m = modulus(ring);
    let ints: Vec<i64> = (0..len).map(|_| rng.gen_range(0..m)).collect();
    CycloSeries::from_ints(ring, &ints)
}

/// A few terms `c·u^k·a^α·b^β` with exponents in `[-exp, exp]`.
pub fn base<R: Rng>(rng: &mut R, rp: &Arc<RelParams>, terms: usize, u_deg: usize, exp: i8) -> RelBase {
    let mut acc = RelBase::zero(rp);
    for _ in 0..terms {
        let mut x = RelBase::from_series(rp, series(rng, &rp.ring, u_deg + 1));
        for i in 0..rp.d {
            for var in [RelBase::a_var, RelBase::b_var] {
                let e = rng.gen_range(-exp..=exp);
                x = x.mul(&var(rp, i, e).expect("exponent inside the box")).expect("inside the box");
            }
        }
        acc = acc.add(&x);
    }
    acc
}

pub fn base_vec<R: Rng>(rng: &mut R, rp: &Arc<RelParams>, h: usize) -> Vec<RelBase> {
    (0..h).map(|_| base(rng, rp, 2, 3, 1)).collect()
}

/// Up to four PD monomials of degree at most `max_deg` per variable.
pub fn rel<R: Rng>(rng: &mut R, rp: &Arc<RelParams>, flavor: Flavor, max_deg: u8, alpha: i8) -> RelPD {
    let dd = RelPD::u_degree_for(rp, flavor) as u8;
    let m = modulus(&rp.ring);
    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(1..5) {
        let mut key = Key::ONE;
        for v in 0..=rp.d {
            key.k[v] = rng.gen_range(0..=max_deg);
        }
        key.r = rng.gen_range(0..dd);
        for i in 0..rp.d {
            key.alpha[i] = rng.gen_range(-alpha..=alpha);
        }
        terms.push((key, rp.ring.int(rng.gen_range(0..m))));
    }
    RelPD::from_terms(rp, flavor, rp.ring.prec, terms)
}

/// Element of `J^{[n]}/J^{[n+1]} ⊗ N` for rank one, as `(index, coordinates)`,
/// with roughly half the coefficients divisible by `π`. Returns the direction `s` too.
pub fn divisibility_instance<R: Rng>(rng: &mut R, rp: &Arc<RelParams>) -> (Vec<([u8; 4], Vec<RelBase>)>, usize) {
    let pi = RelBase::from_series(rp, CycloSeries::pi_element(&rp.ring));
    let n = rng.gen_range(1..=3);
    let s = rng.gen_range(1..=rp.d);
    let mut x = Vec::new();
    for i in multi_indices(rp.d, n) {
        if rng.gen_bool(0.5) {
            continue;
        }
        let mut c = RelBase::int(rp, rng.gen_range(-9..=9));
        if rng.gen_bool(0.3) {
            c = c
                .mul(&RelBase::a_var(rp, 0, rng.gen_range(-1..=1)).expect("inside the box"))
                .expect("inside the box");
        }
        if rng.gen_bool(0.6) {
            c = c.mul(&pi).expect("inside the box");
        }
        x.push((i, vec![c]));
    }
    (x, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::Chi0Policy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seeded_generators_are_reproducible() {
        let ring = RingParams::new(3, 1, 6, 32, 32, &Chi0Policy::Default).unwrap();
        let rp = RelParams::new(&ring, 2, 8, 6).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (
                base(&mut rng, &rp, 3, 4, 2).to_text(),
                rel(&mut rng, &rp, Flavor::SHat(1), 2, 2).to_text(),
                series(&mut rng, &ring, 5).to_text(),
            )
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }
}
