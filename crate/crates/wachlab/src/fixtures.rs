use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::cyclo::CycloSeries;
use crate::descent::{t_over_pi, ClosedForm};
use crate::error::{Result, WachError};
use crate::matrix::Mat;
use crate::relative::{Flavor, RelBase, RelPD, RelParams};
use crate::wach::WachModule;

/// Built-in test modules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fixture {
    Trivial,
    Twist(u32),
    Sum(u32, u32),
    Tensor(u32, u32),
    Gauge(u32),
    CorruptCommutation,
}

fn parse_u32(s: &str, what: &str) -> Result<u32> {
    s.trim()
        .parse()
        .map_err(|_| WachError::Config(format!("bad {what} in fixture: {s:?}")))
}

fn parse_pair(s: &str) -> Result<(u32, u32)> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| WachError::Config(format!("expected two weights, got {s:?}")))?;
    Ok((parse_u32(a, "weight")?, parse_u32(b, "weight")?))
}

impl FromStr for Fixture {
    type Err = WachError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let need = |a: Option<&'_ str>| -> Result<String> {
            a.map(str::to_owned)
                .ok_or_else(|| WachError::Config(format!("fixture {name} needs an argument")))
        };
        match name {
            "trivial" => Ok(Fixture::Trivial),
            "twist" => Ok(Fixture::Twist(parse_u32(&need(arg)?, "weight")?)),
            "sum" => {
                let (a, b) = parse_pair(&need(arg)?)?;
                Ok(Fixture::Sum(a, b))
            }
            "tensor" => {
                let (a, b) = parse_pair(&need(arg)?)?;
                Ok(Fixture::Tensor(a, b))
            }
            "gauge" => Ok(Fixture::Gauge(parse_u32(&need(arg)?, "weight")?)),
            "corrupt-commutation" => Ok(Fixture::CorruptCommutation),
            _ => Err(WachError::Config(format!(
                "unknown fixture {s:?}; expected trivial, twist:r, sum:r1,r2, tensor:r1,r2, gauge:r or corrupt-commutation"
            ))),
        }
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fixture::Trivial => write!(f, "trivial"),
            Fixture::Twist(r) => write!(f, "twist:{r}"),
            Fixture::Sum(a, b) => write!(f, "sum:{a},{b}"),
            Fixture::Tensor(a, b) => write!(f, "tensor:{a},{b}"),
            Fixture::Gauge(r) => write!(f, "gauge:{r}"),
            Fixture::CorruptCommutation => write!(f, "corrupt-commutation"),
        }
    }
}

fn twist_closed(rp: &Arc<RelParams>, r: u32) -> Result<RelPD> {
    let t = t_over_pi(rp)?;
    let mut out = RelPD::one(rp, t.flavor());
    for _ in 0..r {
        out = out.mul(&t)?;
    }
    Ok(out)
}

fn p_pow_base(rp: &Arc<RelParams>, r: u32) -> RelBase {
    RelBase::int(rp, (rp.ring.p as i64).pow(r))
}

impl Fixture {
    /// Smallest torus dimension the fixture makes sense in.
    pub fn min_d(&self) -> usize {
        match self {
            Fixture::CorruptCommutation => 2,
            Fixture::Gauge(_) => 1,
            _ => 0,
        }
    }

    pub fn module(&self, rp: &Arc<RelParams>) -> Result<WachModule> {
        if rp.d < self.min_d() {
            return Err(WachError::Config(format!("fixture {self} needs d ≥ {}", self.min_d())));
        }
        match *self {
            Fixture::Trivial => Ok(WachModule::trivial(rp, 2)),
            Fixture::Twist(r) => WachModule::twist(rp, r),
            Fixture::Sum(a, b) => WachModule::twist(rp, a)?.direct_sum(&WachModule::twist(rp, b)?),
            Fixture::Tensor(a, b) => WachModule::twist(rp, a)?.tensor(&WachModule::twist(rp, b)?),
            Fixture::Gauge(r) => {
                let (u, u_inv) = WachModule::torus_gauge(rp)?;
                WachModule::twist(rp, r)?.change_basis(&Mat::scalar(u), &Mat::scalar(u_inv))
            }
            Fixture::CorruptCommutation => {
                let one = RelBase::one(rp);
                let pi = RelBase::from_series(rp, CycloSeries::pi_element(&rp.ring));
                let g1 = one.add(&pi.mul(&RelBase::b_var(rp, 1, 1)?)?);
                let mut g = vec![Mat::scalar(one.clone()); rp.d + 1];
                g[1] = Mat::scalar(g1);
                let mut w = WachModule::new(rp, 0, Mat::scalar(one.clone()), g)?;
                w.psi = Some(Mat::scalar(one));
                Ok(w)
            }
        }
    }

    /// Known invariant basis, when the fixture has one.
    pub fn closed_form(&self, rp: &Arc<RelParams>) -> Result<Option<ClosedForm>> {
        let flavor = Flavor::SHat(rp.ring.m);
        let zero = RelPD::zero(rp, flavor);
        Ok(Some(match *self {
            Fixture::Trivial => {
                let one = RelPD::one(rp, flavor);
                ClosedForm {
                    f: vec![vec![one.clone(), zero.clone()], vec![zero, one]],
                    weights: vec![0, 0],
                    eigen: vec![RelBase::one(rp), RelBase::one(rp)],
                }
            }
            Fixture::Twist(r) => ClosedForm {
                f: vec![vec![twist_closed(rp, r)?]],
                weights: vec![r],
                eigen: vec![p_pow_base(rp, r)],
            },
            Fixture::Sum(a, b) => ClosedForm {
                f: vec![
                    vec![twist_closed(rp, a)?, zero.clone()],
                    vec![zero, twist_closed(rp, b)?],
                ],
                weights: vec![a, b],
                eigen: vec![p_pow_base(rp, a), p_pow_base(rp, b)],
            },
            Fixture::Tensor(a, b) => ClosedForm {
                f: vec![vec![twist_closed(rp, a + b)?]],
                weights: vec![a + b],
                eigen: vec![p_pow_base(rp, a + b)],
            },
            Fixture::Gauge(r) => {
                let (_, u_inv) = WachModule::torus_gauge(rp)?;
                let mut a_prod = RelBase::one(rp);
                for i in 0..rp.d {
                    a_prod = a_prod.mul(&RelBase::a_var(rp, i, 1)?)?;
                }
                let coord = RelPD::from_base(&a_prod.mul(&u_inv)?, flavor)?;
                let lambda = p_pow_base(rp, r).mul(&a_prod.pow(rp.ring.p - 1)?)?;
                ClosedForm {
                    f: vec![vec![coord.mul(&twist_closed(rp, r)?)?]],
                    weights: vec![r],
                    eigen: vec![lambda],
                }
            }
            Fixture::CorruptCommutation => return Ok(None),
        }))
    }
}
