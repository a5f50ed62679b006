//! Upper and lower bounds for `u(t)`, the largest number of variables in
//! which `t` quadratic forms can lack a common nontrivial zero.
//!
//! Everything here is exact integer arithmetic. The divisions by 2 and by
//! `2m` are always exact; a nonzero remainder is a bug and panics.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::is_prime;

/// Which formula produced a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    Theorem,
    Leep,
    LeepQp,
    Corollary1,
    Corollary2,
    Laststop,
    Inductwo,
    Lower,
    DimshaveChain,
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).unwrap();
        write!(f, "{}", s.as_str().unwrap())
    }
}

/// A known value `u(j)` together with where it comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub value: u64,
    pub provenance: String,
}

/// Partial map `j -> u(j)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UTable(pub BTreeMap<u64, TableEntry>);

impl UTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, j: u64, value: u64, provenance: &str) -> Self {
        self.0.insert(j, TableEntry { value, provenance: provenance.into() });
        self
    }

    /// `u(1) = 4`, `u(2) = 8` for local fields, plus `u(3) = 12` when the
    /// residue characteristic is at least 11.
    pub fn local_field(p: Option<u64>) -> Self {
        let t = UTable::new().with(1, 4, "Hasse").with(2, 8, "Demjanov");
        match p {
            Some(p) if p >= 11 => t.with(3, 12, "Birch-Lewis-Schuur"),
            _ => t,
        }
    }

    pub fn get(&self, j: u64) -> Result<u64> {
        self.0.get(&j).map(|e| e.value).ok_or(Error::MissingTableEntry(j))
    }
}

/// Every input a bound was computed from, echoed in reports.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub t: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u1: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<UTable>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub value: u64,
    pub formula: Formula,
    pub inputs: BoundInputs,
}

fn positive(name: &str, x: u64) -> Result<()> {
    if x == 0 {
        Err(Error::Precondition(format!("{name} must be >= 1")))
    } else {
        Ok(())
    }
}

fn exact_div(num: i128, den: i128) -> u64 {
    assert!(num % den == 0, "{num} is not divisible by {den}");
    let q = num / den;
    u64::try_from(q).expect("bound overflows u64")
}

/// The unique `tau` with `1 <= tau <= m` and `tau = t (mod m)`.
pub fn tau(t: u64, m: u64) -> u64 {
    assert!(t >= 1 && m >= 1);
    (t - 1) % m + 1
}

/// The even integer `t(t - m + 2) + tau(m - tau)`.
pub fn theorem_bracket(t: u64, m: u64) -> i128 {
    let (t, m, tau) = (t as i128, m as i128, tau(t, m) as i128);
    t * (t - m + 2) + tau * (m - tau)
}

/// `u(t) <= ((t(t - m + 2) + tau(m - tau)) / 2) u(1)`, valid when
/// `u(m) = m u(1)`.
pub fn theorem_bound(t: u64, m: u64, u1: u64) -> Result<BoundReport> {
    positive("t", t)?;
    positive("m", m)?;
    positive("u1", u1)?;
    let bracket = theorem_bracket(t, m);
    let value = exact_div(bracket * u1 as i128, 2);
    assert!(bracket % 2 == 0);
    Ok(BoundReport {
        value,
        formula: Formula::Theorem,
        inputs: BoundInputs { t, m: Some(m), u1: Some(u1), tau: Some(tau(t, m)), ..Default::default() },
    })
}

/// The general bound `t(t+1)/2 * u(1)` and, for `t >= 2`, the Q_p bound
/// `2t^2 + 2t - 4`.
pub fn leep_bounds(t: u64, u1: u64) -> Result<(BoundReport, Option<BoundReport>)> {
    positive("t", t)?;
    positive("u1", u1)?;
    let general = BoundReport {
        value: exact_div(t as i128 * (t as i128 + 1) * u1 as i128, 2),
        formula: Formula::Leep,
        inputs: BoundInputs { t, u1: Some(u1), ..Default::default() },
    };
    let qp = (t >= 2).then(|| BoundReport {
        value: 2 * t * t + 2 * t - 4,
        formula: Formula::LeepQp,
        inputs: BoundInputs { t, ..Default::default() },
    });
    Ok((general, qp))
}

/// Bound over any local field: `2t^2 + 2` for odd `t`, `2t^2` for even `t`.
pub fn local_field_bound(t: u64) -> Result<BoundReport> {
    positive("t", t)?;
    let value = if t % 2 == 1 { 2 * t * t + 2 } else { 2 * t * t };
    Ok(BoundReport { value, formula: Formula::Corollary1, inputs: BoundInputs { t, ..Default::default() } })
}

fn corollary2(t: u64) -> u64 {
    if t.is_multiple_of(3) {
        2 * t * t - 2 * t
    } else {
        2 * t * t - 2 * t + 4
    }
}

/// Best available bound over Q_p: the local-field bound, improved for
/// `p >= 11`. Ties keep the local-field formula.
pub fn qp_bound(t: u64, p: u64) -> Result<BoundReport> {
    positive("t", t)?;
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let mut best = local_field_bound(t)?;
    best.inputs.p = Some(p);
    if p >= 11 {
        let v = corollary2(t);
        if v < best.value {
            best.value = v;
            best.formula = Formula::Corollary2;
        }
    }
    Ok(best)
}

/// `u(t) >= t u(1)`, from direct sums of anisotropic forms.
pub fn lower_bound(t: u64, u1: u64) -> Result<BoundReport> {
    positive("t", t)?;
    positive("u1", u1)?;
    Ok(BoundReport {
        value: t * u1,
        formula: Formula::Lower,
        inputs: BoundInputs { t, u1: Some(u1), ..Default::default() },
    })
}

/// `u(t) <= u(t - rk) + sum_{i=1}^{r} (t - ik + 1) u(k)`, for `rk < t`.
/// `r = 0` is the trivial bound `u(t)`.
pub fn laststop_bound(t: u64, k: u64, r: u64, table: &UTable) -> Result<BoundReport> {
    positive("t", t)?;
    positive("k", k)?;
    if r * k >= t {
        return Err(Error::Precondition(format!("need r*k < t, got r={r}, k={k}, t={t}")));
    }
    let uk = table.get(k)?;
    let mut value = table.get(t - r * k)?;
    for i in 1..=r {
        value += (t - i * k + 1) * uk;
    }
    Ok(BoundReport {
        value,
        formula: Formula::Laststop,
        inputs: BoundInputs { t, k: Some(k), r: Some(r), table: Some(table.clone()), ..Default::default() },
    })
}

/// The recursion taken with `k = m` and `r = (t - tau)/m`:
/// `u(t) <= u(tau) + ((t - tau)/(2m)) (t - m + tau + 2) u(m)`.
pub fn inductwo_bound(t: u64, m: u64, table: &UTable) -> Result<BoundReport> {
    positive("t", t)?;
    positive("m", m)?;
    let tau = tau(t, m);
    let u_tau = table.get(tau)?;
    let u_m = table.get(m)?;
    let (ti, mi, taui) = (t as i128, m as i128, tau as i128);
    let tail = exact_div((ti - taui) * (ti - mi + taui + 2) * u_m as i128, 2 * mi);
    Ok(BoundReport {
        value: u_tau + tail,
        formula: Formula::Inductwo,
        inputs: BoundInputs { t, m: Some(m), tau: Some(tau), table: Some(table.clone()), ..Default::default() },
    })
}

/// `u^(d)(t) <= u(t) + d(t + 1)`: iterating the subspace step `d` times.
pub fn dimshave_chain(t: u64, d: u64, u_t: u64) -> Result<BoundReport> {
    positive("t", t)?;
    Ok(BoundReport {
        value: u_t + d * (t + 1),
        formula: Formula::DimshaveChain,
        inputs: BoundInputs { t, d: Some(d), ..Default::default() },
    })
}
