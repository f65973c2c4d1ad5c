//! Binomial coefficients extended by zero outside `0 <= k <= n`, and a set of
//! alternating-sum identities that the geometry and synthesis code relies on.
//!
//! Everything here is exact `i64` arithmetic. The identities are evaluated by
//! literal summation of the left side and compared to the closed form, so they
//! double as oracles for the floating-point code elsewhere in the crate.

use thiserror::Error;

/// Largest argument magnitude accepted by [`binom`].
///
/// `C(62, 31)` is about `4.65e17`, comfortably inside `i64`.
pub const MAX_ARG: i64 = 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CombinError {
    #[error("binomial argument out of range: C({n}, {k}) exceeds |arg| <= {MAX_ARG}")]
    Range { n: i64, k: i64 },
    #[error("{identity}: parameter outside domain, requires {bound}")]
    Domain {
        identity: &'static str,
        bound: &'static str,
    },
}

/// `C(n, k)`, zero when `k < 0` or `k > n` (this includes every negative `n`).
pub fn binom(n: i64, k: i64) -> Result<i64, CombinError> {
    if n.abs() > MAX_ARG || k.abs() > MAX_ARG {
        return Err(CombinError::Range { n, k });
    }
    if k < 0 || k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    // running product; after step j the accumulator equals C(n - k + j, j)
    let mut acc: i128 = 1;
    for j in 1..=k as i128 {
        acc = acc * (n as i128 - k as i128 + j) / j;
    }
    Ok(acc as i64)
}

/// Floating-point `C(n, k)` for arguments beyond the exact range, with the same
/// zero convention. Used by the synthesis function where the step count can be
/// large.
pub fn binom_f64(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0_f64;
    for j in 1..=k {
        acc = acc * (n - k + j) as f64 / j as f64;
    }
    acc
}

fn c(n: i64, k: i64) -> Result<i64, CombinError> {
    binom(n, k)
}

fn sgn(i: i64) -> i64 {
    if i.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// The identity families. Field names follow the usual letters: `m` is an
/// order, `k` a step count, `i` a coordinate index and `nu` a nesting depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    /// `sum_{j=1}^{k} C(j+m-i-1, m-i) = C(m+k-i, m-i+1)`; k >= 0, m >= 1, 1 <= i <= m.
    ColumnSum { m: i64, k: i64, i: i64 },
    /// `sum_{i=0}^{m-1} (-1)^i C(m-1,i) C(k+m-i-1, m-i) = C(k,m)`; k, m >= 1.
    AlternatingColumn { m: i64, k: i64 },
    /// `sum_{i=0}^{m-1} (-1)^i C(k,i) C(k+m-i-1, m-i) = (-1)^(m-1) C(k,m)`; k >= m-1, m >= 2.
    SignedProduct { m: i64, k: i64 },
    /// As [`Identity::SignedProduct`] with `C(k+m-i-2, m-i)` in the sum.
    SignedProductShifted { m: i64, k: i64 },
    /// `sum_{i=0}^{m-1} (-1)^i C(k,i) = (-1)^(m-1) C(k-1, m-1)`; k, m >= 1.
    PartialRow { m: i64, k: i64 },
    /// `sum_{i=0}^{m-1} (-1)^i C(m,i) C(k+m-i-1, m-i) = C(k-1,m) + (-1)^(m-1)`; k, m >= 1.
    RowColumn { m: i64, k: i64 },
    /// `sum_{i=0}^{m-1} (-1)^i C(m,i) = (-1)^(m-1)`; m >= 1.
    TruncatedRow { m: i64 },
    /// `sum_{i=0}^{m-nu-1} (-1)^i C(m-nu-1, i) C(k+m-i-nu-1, m-i-nu) = 0`;
    /// m >= 1, 0 <= nu <= m-1, 0 <= k <= m-1-nu.
    NestedVanishing { m: i64, nu: i64, k: i64 },
}

impl Identity {
    pub fn name(&self) -> &'static str {
        match self {
            Identity::ColumnSum { .. } => "column-sum",
            Identity::AlternatingColumn { .. } => "alternating-column",
            Identity::SignedProduct { .. } => "signed-product",
            Identity::SignedProductShifted { .. } => "signed-product-shifted",
            Identity::PartialRow { .. } => "partial-row",
            Identity::RowColumn { .. } => "row-column",
            Identity::TruncatedRow { .. } => "truncated-row",
            Identity::NestedVanishing { .. } => "nested-vanishing",
        }
    }

    /// Every admissible instance with `1 <= m <= max_m` and `0 <= k <= max_k`.
    pub fn enumerate(max_m: i64, max_k: i64) -> Vec<Identity> {
        let mut out = Vec::new();
        for m in 1..=max_m {
            for k in 0..=max_k {
                for i in 1..=m {
                    out.push(Identity::ColumnSum { m, k, i });
                }
                if k >= 1 {
                    out.push(Identity::AlternatingColumn { m, k });
                    out.push(Identity::PartialRow { m, k });
                    out.push(Identity::RowColumn { m, k });
                }
                if m >= 2 && k >= m - 1 {
                    out.push(Identity::SignedProduct { m, k });
                    out.push(Identity::SignedProductShifted { m, k });
                }
                for nu in 0..m {
                    if k <= m - 1 - nu {
                        out.push(Identity::NestedVanishing { m, nu, k });
                    }
                }
            }
            out.push(Identity::TruncatedRow { m });
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityCheck {
    pub holds: bool,
    pub lhs: i64,
    pub rhs: i64,
}

fn domain(identity: &Identity, ok: bool, bound: &'static str) -> Result<(), CombinError> {
    if ok {
        Ok(())
    } else {
        Err(CombinError::Domain {
            identity: identity.name(),
            bound,
        })
    }
}

/// Evaluate both sides of an identity instance.
pub fn check_identity(id: Identity) -> Result<IdentityCheck, CombinError> {
    let (lhs, rhs) = match id {
        Identity::ColumnSum { m, k, i } => {
            domain(&id, k >= 0, "k >= 0")?;
            domain(&id, m >= 1, "m >= 1")?;
            domain(&id, (1..=m).contains(&i), "1 <= i <= m")?;
            let mut lhs = 0;
            for j in 1..=k {
                lhs += c(j + m - i - 1, m - i)?;
            }
            (lhs, c(m + k - i, m - i + 1)?)
        }
        Identity::AlternatingColumn { m, k } => {
            domain(&id, k >= 1, "k >= 1")?;
            domain(&id, m >= 1, "m >= 1")?;
            let mut lhs = 0;
            for i in 0..m {
                lhs += sgn(i) * c(m - 1, i)? * c(k + m - i - 1, m - i)?;
            }
            (lhs, c(k, m)?)
        }
        Identity::SignedProduct { m, k } | Identity::SignedProductShifted { m, k } => {
            domain(&id, m >= 2, "m >= 2")?;
            domain(&id, k >= m - 1, "k >= m - 1")?;
            let shift = if matches!(id, Identity::SignedProduct { .. }) {
                1
            } else {
                2
            };
            let mut lhs = 0;
            for i in 0..m {
                lhs += sgn(i) * c(k, i)? * c(k + m - i - shift, m - i)?;
            }
            (lhs, sgn(m - 1) * c(k, m)?)
        }
        Identity::PartialRow { m, k } => {
            domain(&id, k >= 1, "k >= 1")?;
            domain(&id, m >= 1, "m >= 1")?;
            let mut lhs = 0;
            for i in 0..m {
                lhs += sgn(i) * c(k, i)?;
            }
            (lhs, sgn(m - 1) * c(k - 1, m - 1)?)
        }
        Identity::RowColumn { m, k } => {
            domain(&id, k >= 1, "k >= 1")?;
            domain(&id, m >= 1, "m >= 1")?;
            let mut lhs = 0;
            for i in 0..m {
                lhs += sgn(i) * c(m, i)? * c(k + m - i - 1, m - i)?;
            }
            (lhs, c(k - 1, m)? + sgn(m - 1))
        }
        Identity::TruncatedRow { m } => {
            domain(&id, m >= 1, "m >= 1")?;
            let mut lhs = 0;
            for i in 0..m {
                lhs += sgn(i) * c(m, i)?;
            }
            (lhs, sgn(m - 1))
        }
        Identity::NestedVanishing { m, nu, k } => {
            domain(&id, m >= 1, "m >= 1")?;
            domain(&id, (0..m).contains(&nu), "0 <= nu <= m - 1")?;
            domain(&id, (0..=m - 1 - nu).contains(&k), "0 <= k <= m - 1 - nu")?;
            let mut lhs = 0;
            for i in 0..=(m - nu - 1) {
                lhs += sgn(i) * c(m - nu - 1, i)? * c(k + m - i - nu - 1, m - i - nu)?;
            }
            (lhs, 0)
        }
    };
    Ok(IdentityCheck {
        holds: lhs == rhs,
        lhs,
        rhs,
    })
}
