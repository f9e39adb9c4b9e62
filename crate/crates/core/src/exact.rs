//! Exact rational evaluation of the closed-form win-probability recursions.
//!
//! Every value here is a [`Probability`], an arbitrary-precision reduced
//! fraction. The recursions are memoized per thread, keyed by their integer
//! arguments, and grow on demand.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("werewolves ({wolves}) exceed players ({players})")]
    WolvesExceedPlayers { players: u32, wolves: u32 },
    #[error("self-kill value needs at least one werewolf and two players, got n={players}, m={wolves}")]
    SelfKillDomain { players: u32, wolves: u32 },
    #[error("checked villagers ({checked}) exceed villagers ({villagers})")]
    CheckedExceedVillagers { villagers: u32, checked: u32 },
    #[error("checked werewolves ({checked}) exceed werewolves ({wolves})")]
    CheckedExceedWolves { wolves: u32, checked: u32 },
}

/// An exact probability (or any non-negative rational used alongside one).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Probability(BigRational);

impl Probability {
    pub fn zero() -> Self {
        Probability(BigRational::zero())
    }

    pub fn one() -> Self {
        Probability(BigRational::one())
    }

    /// `num / den`, reduced. Panics if `den` is zero.
    pub fn ratio(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        Probability(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        Probability(BigRational::new(num, den))
    }

    pub fn from_rational(value: BigRational) -> Self {
        Probability(value)
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    /// (1/2)^k
    pub fn half_pow(k: u32) -> Self {
        Probability(BigRational::new(BigInt::one(), BigInt::one() << k as usize))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// True when the value lies in the closed unit interval.
    pub fn is_unit(&self) -> bool {
        !self.0.is_negative() && self.0 <= BigRational::one()
    }

    pub fn complement(&self) -> Self {
        Probability(BigRational::one() - &self.0)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering with a fixed number of fractional digits, computed
    /// from the exact fraction (round half up).
    pub fn to_decimal(&self, digits: u32) -> String {
        let scale = num_traits::pow(BigInt::from(10), digits as usize);
        let scaled = &self.0 * BigRational::from_integer(scale.clone());
        let rounded = (scaled + BigRational::new(BigInt::one(), BigInt::from(2))).floor();
        let int = rounded.to_integer();
        let (q, r) = (&int / &scale, &int % &scale);
        if digits == 0 {
            return q.to_string();
        }
        format!("{}.{:0>width$}", q, r.to_string(), width = digits as usize)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("cannot parse {0:?} as a fraction")]
pub struct ParseProbabilityError(String);

impl FromStr for Probability {
    type Err = ParseProbabilityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseProbabilityError(s.to_string());
        let (num, den) = match s.trim().split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num: BigInt = num.parse().map_err(|_| err())?;
        let den: BigInt = den.parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        Ok(Probability::from_big(num, den))
    }
}

/// Wire form: `{"num": "7", "den": "8"}`; strings keep arbitrary precision.
#[derive(Serialize, Deserialize)]
struct FractionRepr {
    num: String,
    den: String,
}

impl Serialize for Probability {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        FractionRepr {
            num: self.numer().to_string(),
            den: self.denom().to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Probability {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = FractionRepr::deserialize(deserializer)?;
        format!("{}/{}", repr.num, repr.den)
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Probability {
            type Output = Probability;
            fn $method(self, rhs: Probability) -> Probability {
                Probability($trait::$method(self.0, rhs.0))
            }
        }
        impl<'a> $trait<&'a Probability> for &'a Probability {
            type Output = Probability;
            fn $method(self, rhs: &'a Probability) -> Probability {
                Probability($trait::$method(&self.0, &rhs.0))
            }
        }
        impl<'a> $trait<&'a Probability> for Probability {
            type Output = Probability;
            fn $method(self, rhs: &'a Probability) -> Probability {
                Probability($trait::$method(self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl std::iter::Sum for Probability {
    fn sum<I: Iterator<Item = Probability>>(iter: I) -> Self {
        iter.fold(Probability::zero(), |acc, p| acc + p)
    }
}

/// Players alive and werewolves alive in a prophet-free game, measured after
/// a vote and before the night kill.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NoProphetState {
    pub players: u32,
    pub wolves: u32,
}

/// Public situation at the moment the prophet reveals: villagers, werewolves,
/// checked villagers alive, checked werewolves alive. The prophet is alive and
/// counted separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RevealState {
    pub villagers: u32,
    pub wolves: u32,
    pub checked_villagers: u32,
    pub checked_wolves: u32,
}

impl RevealState {
    pub fn new(villagers: u32, wolves: u32, checked_villagers: u32, checked_wolves: u32) -> Self {
        RevealState {
            villagers,
            wolves,
            checked_villagers,
            checked_wolves,
        }
    }
}

/// Citizen-side payoff once a werewolf is the vote target at parity: the
/// werewolves defect and every following tie is a fair coin, unless a lone
/// werewolf faces a modulus vote with no public information, which it cannot
/// contest.
pub fn parity_defence(wolves: u32, public_information: bool) -> Probability {
    if wolves >= 2 || public_information {
        Probability::half_pow(wolves)
    } else {
        Probability::one()
    }
}

thread_local! {
    static W_PLUS: RefCell<HashMap<(u32, u32), Probability>> = RefCell::new(HashMap::new());
    static V_RANDOM: RefCell<HashMap<(u32, u32), Probability>> = RefCell::new(HashMap::new());
    static U_CHECKED: RefCell<HashMap<(u32, u32, u32), Probability>> = RefCell::new(HashMap::new());
}

fn memoized<K, F>(
    table: &'static std::thread::LocalKey<RefCell<HashMap<K, Probability>>>,
    key: K,
    compute: F,
) -> Probability
where
    K: std::hash::Hash + Eq + Copy,
    F: FnOnce() -> Probability,
{
    if let Some(hit) = table.with(|t| t.borrow().get(&key).cloned()) {
        return hit;
    }
    let value = compute();
    table.with(|t| t.borrow_mut().insert(key, value.clone()));
    value
}

fn check_players(n: u32, m: u32) -> Result<(), ExactError> {
    if m > n {
        Err(ExactError::WolvesExceedPlayers {
            players: n,
            wolves: m,
        })
    } else {
        Ok(())
    }
}

/// Werewolf win probability under "random strategy +" with `n` players and
/// `m` werewolves, measured after a vote and before the night kill.
pub fn w_plus(n: u32, m: u32) -> Result<Probability, ExactError> {
    check_players(n, m)?;
    Ok(w_plus_unchecked(n, m))
}

fn w_plus_unchecked(n: u32, m: u32) -> Probability {
    if m == 0 {
        return Probability::zero();
    }
    if n == 5 && m == 2 {
        return Probability::ratio(7, 8);
    }
    if m >= n - m {
        return Probability::one();
    }
    memoized(&W_PLUS, (n, m), || {
        let d = (n - 1) as u64;
        Probability::ratio((n - 1 - m) as u64, d) * w_plus_unchecked(n - 2, m)
            + Probability::ratio(m as u64, d) * w_plus_unchecked(n - 2, m - 1)
    })
}

/// Werewolf win probability when both sides play the plain random strategy.
pub fn v_random(n: u32, m: u32) -> Result<Probability, ExactError> {
    check_players(n, m)?;
    Ok(v_random_unchecked(n, m))
}

fn v_random_unchecked(n: u32, m: u32) -> Probability {
    if m == 0 {
        return Probability::zero();
    }
    if m >= n - m {
        return Probability::one();
    }
    memoized(&V_RANDOM, (n, m), || {
        let d = (n - 1) as u64;
        Probability::ratio((n - 1 - m) as u64, d) * v_random_unchecked(n - 2, m)
            + Probability::ratio(m as u64, d) * v_random_unchecked(n - 2, m - 1)
    })
}

/// Werewolf win probability when the werewolves kill one of their own on the
/// coming night and then return to "random strategy +".
pub fn w_selfkill(n: u32, m: u32) -> Result<Probability, ExactError> {
    check_players(n, m)?;
    if m == 0 || n < 2 {
        return Err(ExactError::SelfKillDomain {
            players: n,
            wolves: m,
        });
    }
    let d = (n - 1) as u64;
    let mut total = Probability::zero();
    // Zero-weight branches are skipped before their continuation is touched.
    if m >= 2 {
        total = total + Probability::ratio((m - 1) as u64, d) * w_plus(n - 2, m - 2)?;
    }
    if n > m {
        total = total + Probability::ratio((n - m) as u64, d) * w_plus(n - 2, m - 1)?;
    }
    Ok(total)
}

/// Citizen win probability after the prophet has revealed, prophet alive.
pub fn s_reveal(state: RevealState) -> Result<Probability, ExactError> {
    let RevealState {
        villagers: big_n,
        wolves: big_m,
        checked_villagers: n,
        checked_wolves: m,
    } = state;
    if n > big_n {
        return Err(ExactError::CheckedExceedVillagers {
            villagers: big_n,
            checked: n,
        });
    }
    if m > big_m {
        return Err(ExactError::CheckedExceedWolves {
            wolves: big_m,
            checked: m,
        });
    }
    if big_m == 0 {
        return Ok(Probability::one());
    }
    if big_m > big_n + 1 {
        return Ok(Probability::zero());
    }
    if big_m == big_n + 1 {
        // Parity at the vote; the revealed prophet is alive, so information is public.
        let defence = parity_defence(big_m, true);
        return Ok(if m == 0 {
            Probability::ratio(big_m as u64, (big_n - n + big_m) as u64) * defence
        } else {
            defence
        });
    }
    if m > n {
        let players = big_m + big_n + 2 - 2 * m;
        return Ok(w_plus(players, big_m - m)?.complement());
    }
    if m >= 1 {
        return u_checked(big_n + 1 - m, big_m - m, n + 1 - m);
    }
    let d = (big_n - n + big_m) as u64;
    let mut total = Probability::ratio(big_m as u64, d) * u_checked(big_n, big_m - 1, n)?;
    if big_n > n {
        total = total + Probability::ratio((big_n - n) as u64, d) * u_checked(big_n - 1, big_m, n)?;
    }
    Ok(total)
}

/// Citizen win probability at the start of a day after the revealed prophet
/// has died, with `n_checked` known villagers among `villagers` and no known
/// werewolf left.
pub fn u_checked(villagers: u32, wolves: u32, n_checked: u32) -> Result<Probability, ExactError> {
    if n_checked > villagers {
        return Err(ExactError::CheckedExceedVillagers {
            villagers,
            checked: n_checked,
        });
    }
    Ok(u_checked_unchecked(villagers, wolves, n_checked))
}

fn u_checked_unchecked(big_n: u32, big_m: u32, n: u32) -> Probability {
    if big_m == 0 {
        return Probability::one();
    }
    if big_n < big_m {
        return Probability::zero();
    }
    if big_n == big_m {
        return Probability::ratio(big_m as u64, (big_n - n + big_m) as u64)
            * parity_defence(big_m, n >= 1);
    }
    if n == 0 {
        return w_plus_unchecked(big_n + big_m + 1, big_m).complement();
    }
    memoized(&U_CHECKED, (big_n, big_m, n), || {
        let d = (big_n + big_m - n) as u64;
        let mut total = Probability::ratio(big_m as u64, d)
            * u_checked_unchecked(big_n - 1, big_m - 1, n - 1);
        if big_n > n {
            total = total
                + Probability::ratio((big_n - n) as u64, d)
                    * u_checked_unchecked(big_n - 2, big_m, n - 1);
        }
        total
    })
}

/// Boolean properties reported for one `(n, m)` row of the dominance table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DominanceFlags {
    /// w ≥ v
    pub weak_dominance: bool,
    /// w > v
    pub strict_dominance: bool,
    /// w > w′, present where 2m+1 ≥ 7 and n ≥ 2m+1
    pub beats_selfkill: Option<bool>,
    /// w(n,m) > w(n,m−1)
    pub increasing_in_wolves: Option<bool>,
    /// w(n+2,m) > w(n,m), present when both lie in the unabsorbed region.
    /// Never holds: two more players always favour the citizens.
    pub increasing_by_two_players: Option<bool>,
    /// w(n+2,m) < w(n,m), same domain.
    pub decreasing_by_two_players: Option<bool>,
    /// Parity pattern of w(n,m) against w(n−1,m): greater for even n, smaller
    /// for odd n. Present for n ≥ 2m+1. Fails only at (6,2), just above the
    /// special value w(5,2).
    pub parity_oscillation: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceRow {
    pub n: u32,
    pub m: u32,
    pub w_plus: Probability,
    pub v_random: Probability,
    pub w_selfkill: Option<Probability>,
    pub flags: DominanceFlags,
}

impl DominanceRow {
    /// The ordering properties that hold on every row: w ≥ v, w > w′,
    /// growth in m and decrease over two extra players.
    pub fn all_hold(&self) -> bool {
        let f = &self.flags;
        f.weak_dominance
            && [
                f.beats_selfkill,
                f.increasing_in_wolves,
                f.decreasing_by_two_players,
            ]
            .iter()
            .all(|flag| flag.unwrap_or(true))
    }

    pub fn flags_string(&self) -> String {
        let f = &self.flags;
        let mut parts = Vec::new();
        let mut push = |name: &str, v: Option<bool>| {
            if let Some(v) = v {
                parts.push(format!("{name}={}", if v { 1 } else { 0 }));
            }
        };
        push("w_ge_v", Some(f.weak_dominance));
        push("w_gt_v", Some(f.strict_dominance));
        push("w_gt_selfkill", f.beats_selfkill);
        push("inc_m", f.increasing_in_wolves);
        push("inc_n2", f.increasing_by_two_players);
        push("dec_n2", f.decreasing_by_two_players);
        push("parity", f.parity_oscillation);
        parts.join(";")
    }
}

/// Dominance and monotonicity table over `3 ≤ n ≤ n_max`, `1 ≤ m ≤ min(m_max, n/2)`.
pub fn dominance_report(n_max: u32, m_max: u32) -> Vec<DominanceRow> {
    let mut rows = Vec::new();
    for n in 3..=n_max {
        for m in 1..=m_max.min(n / 2) {
            let w = w_plus_unchecked(n, m);
            let v = v_random_unchecked(n, m);
            let unabsorbed = |n: u32, m: u32| m < n - m;
            let selfkill = (m >= 3 && n > 2 * m)
                .then(|| w_selfkill(n, m).expect("domain checked"));
            let beats_selfkill = selfkill.as_ref().map(|wp| &w > wp);
            let increasing_in_wolves = Some(w > w_plus_unchecked(n, m - 1));
            let plus_two = unabsorbed(n, m).then(|| w_plus_unchecked(n + 2, m));
            let increasing_by_two_players = plus_two.as_ref().map(|w2| w2 > &w);
            let decreasing_by_two_players = plus_two.as_ref().map(|w2| w2 < &w);
            let parity_oscillation = (n > 2 * m).then(|| {
                let prev = w_plus_unchecked(n - 1, m);
                if n % 2 == 0 {
                    w > prev
                } else {
                    w < prev
                }
            });
            rows.push(DominanceRow {
                n,
                m,
                flags: DominanceFlags {
                    weak_dominance: w >= v,
                    strict_dominance: w > v,
                    beats_selfkill,
                    increasing_in_wolves,
                    increasing_by_two_players,
                    decreasing_by_two_players,
                    parity_oscillation,
                },
                w_plus: w,
                v_random: v,
                w_selfkill: selfkill,
            });
        }
    }
    rows
}

/// Renders a fraction cell as `p/q (decimal)` with a 12-digit decimal.
pub fn fraction_cell(p: &Probability) -> String {
    format!("{} ({})", p, p.to_decimal(12))
}

/// CSV with header `n,m,w_plus,v_random,w_selfkill,flags`.
pub fn write_dominance_csv<W: std::io::Write>(rows: &[DominanceRow], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["n", "m", "w_plus", "v_random", "w_selfkill", "flags"])?;
    for row in rows {
        writer.write_record([
            row.n.to_string(),
            row.m.to_string(),
            fraction_cell(&row.w_plus),
            fraction_cell(&row.v_random),
            row.w_selfkill.as_ref().map(fraction_cell).unwrap_or_default(),
            row.flags_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
