//! Integer money amounts and cash-rounding rules.
//!
//! Amounts are carried as whole minor units (agorot, NIS 0.01). A
//! [`RoundingRule`] rounds a cash total to a multiple of its grid, choosing
//! the direction per residue from an explicit table, so "nearest" rules and
//! the asymmetric 2008 Israeli rule are the same kind of object.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};

/// An exact amount in minor units (1 = NIS 0.01).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MinorUnits(pub i64);

impl MinorUnits {
    pub const ZERO: MinorUnits = MinorUnits(0);

    pub const fn new(value: i64) -> Self {
        MinorUnits(value)
    }

    pub const fn value(self) -> i64 {
        self.0
    }

    pub fn checked_add(self, rhs: MinorUnits) -> Option<MinorUnits> {
        self.0.checked_add(rhs.0).map(MinorUnits)
    }

    pub fn checked_sub(self, rhs: MinorUnits) -> Option<MinorUnits> {
        self.0.checked_sub(rhs.0).map(MinorUnits)
    }
}

impl Add for MinorUnits {
    type Output = MinorUnits;
    fn add(self, rhs: MinorUnits) -> MinorUnits {
        MinorUnits(self.0 + rhs.0)
    }
}

impl Sub for MinorUnits {
    type Output = MinorUnits;
    fn sub(self, rhs: MinorUnits) -> MinorUnits {
        MinorUnits(self.0 - rhs.0)
    }
}

impl Neg for MinorUnits {
    type Output = MinorUnits;
    fn neg(self) -> MinorUnits {
        MinorUnits(-self.0)
    }
}

impl fmt::Display for MinorUnits {
    /// Formats as a decimal major-unit string with exactly two fraction digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

impl FromStr for MinorUnits {
    type Err = Error;

    /// Parses `[+-]digits[.d[d]]`. More than two fraction digits would not
    /// be representable exactly and are rejected.
    fn from_str(s: &str) -> Result<Self> {
        let err = |reason| Error::ParseAmount {
            input: s.to_owned(),
            reason,
        };
        let (negative, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            Some(_) => (false, s),
            None => return Err(err("empty string")),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (body, None),
        };
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("expected decimal digits before the point"));
        }
        let mut cents: i64 = 0;
        if let Some(frac) = frac_part {
            if frac.is_empty() || frac.len() > 2 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err("expected one or two fraction digits"));
            }
            cents = frac.parse::<i64>().map_err(|_| err("bad fraction"))?;
            if frac.len() == 1 {
                cents *= 10;
            }
        }
        let whole: i64 = int_part.parse().map_err(|_| err("integer part out of range"))?;
        let magnitude = whole
            .checked_mul(100)
            .and_then(|v| v.checked_add(cents))
            .ok_or_else(|| err("amount out of range"))?;
        Ok(MinorUnits(if negative { -magnitude } else { magnitude }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Down,
    Up,
}

/// A cash-rounding rule: a grid in minor units plus a direction for every
/// nonzero residue modulo the grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RoundingRule {
    grid: u32,
    /// `policy[r - 1]` is the direction for residue `r`.
    policy: Vec<Direction>,
}

impl RoundingRule {
    /// Builds a rule from explicit down/up residue sets. Every residue
    /// `1..grid` must appear in exactly one of the two sets.
    pub fn new(grid: u32, down: &[u32], up: &[u32]) -> Result<Self> {
        if grid == 0 {
            return Err(Error::InvalidRule("grid must be positive".into()));
        }
        let mut slots: Vec<Option<Direction>> = vec![None; grid as usize - 1];
        for (set, dir) in [(down, Direction::Down), (up, Direction::Up)] {
            for &r in set {
                if r == 0 || r >= grid {
                    return Err(Error::InvalidRule(format!(
                        "residue {r} is outside 1..{}",
                        grid - 1
                    )));
                }
                let slot = &mut slots[r as usize - 1];
                if slot.is_some() {
                    return Err(Error::InvalidRule(format!("residue {r} listed twice")));
                }
                *slot = Some(dir);
            }
        }
        let policy = slots
            .into_iter()
            .enumerate()
            .map(|(i, d)| d.ok_or_else(|| Error::InvalidRule(format!("residue {} has no direction", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        Ok(RoundingRule { grid, policy })
    }

    /// Israel's 2008-2014 rule: 10-agora grid, endings 1-4 down, 5-9 up.
    pub fn israel_2008() -> Self {
        RoundingRule::new(10, &[1, 2, 3, 4], &[5, 6, 7, 8, 9]).expect("static rule")
    }

    /// Round-to-nearest on `grid`; residues with `2r < grid` go down, the
    /// rest (including an exact midpoint) go up.
    pub fn symmetric(grid: u32) -> Result<Self> {
        if grid == 0 {
            return Err(Error::InvalidRule("grid must be positive".into()));
        }
        let (down, up): (Vec<u32>, Vec<u32>) = (1..grid).partition(|&r| 2 * r < grid);
        RoundingRule::new(grid, &down, &up)
    }

    pub fn grid(&self) -> u32 {
        self.grid
    }

    pub fn direction(&self, residue: u32) -> Option<Direction> {
        if residue == 0 || residue >= self.grid {
            None
        } else {
            Some(self.policy[residue as usize - 1])
        }
    }

    fn residues(&self, dir: Direction) -> Vec<u32> {
        (1..self.grid)
            .filter(|&r| self.policy[r as usize - 1] == dir)
            .collect()
    }

    /// Rounds a non-negative cash total onto the grid.
    pub fn round_amount(&self, amount: MinorUnits) -> Result<MinorUnits> {
        if amount.0 < 0 {
            return Err(Error::Domain(format!(
                "cannot round negative amount {amount}"
            )));
        }
        let grid = i64::from(self.grid);
        let residue = amount.0 % grid;
        let base = amount.0 - residue;
        Ok(match self.direction(residue as u32) {
            None | Some(Direction::Down) => MinorUnits(base),
            Some(Direction::Up) => MinorUnits(base + grid),
        })
    }

    /// Signed rounding tax on one transaction; positive means the customer
    /// pays more than the posted total.
    pub fn rounding_delta(&self, amount: MinorUnits) -> Result<MinorUnits> {
        Ok(self.round_amount(amount)? - amount)
    }

    /// `table[r]` is the delta for any total with residue `r` mod grid.
    pub fn delta_by_residue(&self) -> Vec<i64> {
        let grid = i64::from(self.grid);
        (0..self.grid)
            .map(|r| match self.direction(r) {
                None | Some(Direction::Down) => -i64::from(r),
                Some(Direction::Up) => grid - i64::from(r),
            })
            .collect()
    }
}

impl fmt::Display for RoundingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<u32>| {
            v.iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            f,
            "grid={}; down={}; up={}",
            self.grid,
            join(self.residues(Direction::Down)),
            join(self.residues(Direction::Up))
        )
    }
}

impl FromStr for RoundingRule {
    type Err = Error;

    /// Accepts `israel_2008`, `symmetric_<grid>`, or the textual form
    /// `grid=<n>; down=<r,r,...>; up=<r,r,...>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "israel_2008" {
            return Ok(RoundingRule::israel_2008());
        }
        if let Some(g) = s.strip_prefix("symmetric_") {
            let grid = g
                .parse()
                .map_err(|_| Error::InvalidRule(format!("bad grid in {s:?}")))?;
            return RoundingRule::symmetric(grid);
        }

        let mut grid = None;
        let mut down = None;
        let mut up = None;
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidRule(format!("expected key=value, got {part:?}")))?;
            let value = value.trim();
            let slot = match key.trim() {
                "grid" => {
                    let g: u32 = value
                        .parse()
                        .map_err(|_| Error::InvalidRule(format!("bad grid {value:?}")))?;
                    if grid.replace(g).is_some() {
                        return Err(Error::InvalidRule("grid given twice".into()));
                    }
                    continue;
                }
                "down" => &mut down,
                "up" => &mut up,
                other => return Err(Error::InvalidRule(format!("unknown key {other:?}"))),
            };
            let residues = value
                .split(',')
                .map(str::trim)
                .filter(|r| !r.is_empty())
                .map(|r| {
                    r.parse::<u32>()
                        .map_err(|_| Error::InvalidRule(format!("bad residue {r:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if slot.replace(residues).is_some() {
                return Err(Error::InvalidRule(format!("{} given twice", key.trim())));
            }
        }
        let grid = grid.ok_or_else(|| {
            Error::InvalidRule(format!(
                "{s:?} is neither a named rule nor a grid=..; down=..; up=.. form"
            ))
        })?;
        RoundingRule::new(grid, &down.unwrap_or_default(), &up.unwrap_or_default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(v: i64) -> MinorUnits {
        MinorUnits(v)
    }

    #[test]
    fn two_nine_endings_round_up_by_two() {
        let rule = RoundingRule::israel_2008();
        assert_eq!(rule.round_amount(m(1998)).unwrap(), m(2000));
        assert_eq!(rule.rounding_delta(m(1998)).unwrap(), m(2));
    }

    #[test]
    fn on_grid_and_low_endings() {
        let rule = RoundingRule::israel_2008();
        assert_eq!(rule.round_amount(m(1000)).unwrap(), m(1000));
        assert_eq!(rule.round_amount(m(1004)).unwrap(), m(1000));
        assert_eq!(rule.rounding_delta(m(1005)).unwrap(), m(5));
        assert_eq!(rule.rounding_delta(m(0)).unwrap(), m(0));
    }

    #[test]
    fn negative_amounts_are_rejected() {
        let rule = RoundingRule::israel_2008();
        assert!(matches!(rule.round_amount(m(-1)), Err(Error::Domain(_))));
        assert!(matches!(rule.rounding_delta(m(-10)), Err(Error::Domain(_))));
    }

    #[test]
    fn residue_tables() {
        assert_eq!(
            RoundingRule::israel_2008().delta_by_residue(),
            vec![0, -1, -2, -3, -4, 5, 4, 3, 2, 1]
        );
        assert_eq!(
            RoundingRule::symmetric(5).unwrap().delta_by_residue(),
            vec![0, -1, -2, 2, 1]
        );
        // Enumerating through round_amount gives the same table.
        for rule in [RoundingRule::israel_2008(), RoundingRule::symmetric(5).unwrap()] {
            let via_round: Vec<i64> = (0..i64::from(rule.grid()))
                .map(|r| rule.rounding_delta(m(r)).unwrap().value())
                .collect();
            assert_eq!(rule.delta_by_residue(), via_round);
        }
    }

    #[test]
    fn israel_mean_delta_is_half_an_agora() {
        let table = RoundingRule::israel_2008().delta_by_residue();
        let mean = table.iter().sum::<i64>() as f64 / table.len() as f64;
        assert_eq!(mean, 0.5);
    }

    #[test]
    fn symmetric_ten_matches_israel_table() {
        assert_eq!(RoundingRule::symmetric(10).unwrap(), RoundingRule::israel_2008());
    }

    #[test]
    fn grid_one_is_identity() {
        let rule = RoundingRule::symmetric(1).unwrap();
        assert_eq!(rule.round_amount(m(1234)).unwrap(), m(1234));
        assert_eq!(rule.delta_by_residue(), vec![0]);
    }

    #[test]
    fn rule_construction_errors() {
        assert!(RoundingRule::new(0, &[], &[]).is_err());
        assert!(RoundingRule::new(5, &[1, 2], &[3]).is_err());
        assert!(RoundingRule::new(5, &[1, 2], &[2, 3, 4]).is_err());
        assert!(RoundingRule::new(5, &[1, 2, 5], &[3, 4]).is_err());
        assert!(RoundingRule::new(5, &[0, 1, 2], &[3, 4]).is_err());
    }

    #[test]
    fn rule_text_forms() {
        let israel: RoundingRule = "israel_2008".parse().unwrap();
        assert_eq!(israel.to_string(), "grid=10; down=1,2,3,4; up=5,6,7,8,9");
        assert_eq!(israel.to_string().parse::<RoundingRule>().unwrap(), israel);

        let sym5: RoundingRule = "symmetric_5".parse().unwrap();
        assert_eq!(sym5.to_string(), "grid=5; down=1,2; up=3,4");

        let custom: RoundingRule = "grid=10; down=1,2,3,4,5; up=6,7,8,9".parse().unwrap();
        assert_eq!(custom.direction(5), Some(Direction::Down));

        for bad in [
            "",
            "nearest",
            "grid=10; down=1,2,3,4",
            "grid=x; down=; up=",
            "grid=5; down=1,2; up=3,4; side=1",
            "grid=5; grid=5; down=1,2; up=3,4",
        ] {
            assert!(bad.parse::<RoundingRule>().is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn amount_formatting() {
        assert_eq!(m(1998).to_string(), "19.98");
        assert_eq!(m(5).to_string(), "0.05");
        assert_eq!(m(-105).to_string(), "-1.05");
        assert_eq!("19.98".parse::<MinorUnits>().unwrap(), m(1998));
        assert_eq!("7".parse::<MinorUnits>().unwrap(), m(700));
        assert_eq!("0.5".parse::<MinorUnits>().unwrap(), m(50));
        assert_eq!("-0.05".parse::<MinorUnits>().unwrap(), m(-5));
        for bad in ["", "-", "1.234", "1.", ".5", "1,00", "abc", "99999999999999999999"] {
            assert!(bad.parse::<MinorUnits>().is_err(), "{bad:?} should fail");
        }
    }

    fn any_rule() -> impl Strategy<Value = RoundingRule> {
        prop_oneof![
            Just(RoundingRule::israel_2008()),
            Just(RoundingRule::symmetric(5).unwrap()),
            (1u32..=20).prop_flat_map(|grid| {
                proptest::collection::vec(any::<bool>(), grid as usize - 1).prop_map(move |ups| {
                    let (up, down): (Vec<u32>, Vec<u32>) =
                        (1..grid).partition(|&r| ups[r as usize - 1]);
                    RoundingRule::new(grid, &down, &up).unwrap()
                })
            }),
        ]
    }

    proptest! {
        #[test]
        fn decimal_round_trip(v in any::<i64>()) {
            let amount = MinorUnits(v);
            prop_assert_eq!(amount.to_string().parse::<MinorUnits>().unwrap(), amount);
        }

        #[test]
        fn rule_text_round_trip(rule in any_rule()) {
            prop_assert_eq!(rule.to_string().parse::<RoundingRule>().unwrap(), rule);
        }

        #[test]
        fn rounding_algebra(rule in any_rule(), a in 0i64..1_000_000_000, k in 0i64..1_000_000) {
            let grid = i64::from(rule.grid());
            let rounded = rule.round_amount(m(a)).unwrap();
            prop_assert_eq!(rounded.value() % grid, 0);
            prop_assert_eq!(rule.round_amount(rounded).unwrap(), rounded);
            let d = rule.rounding_delta(m(a)).unwrap().value();
            prop_assert!(-grid < d && d < grid);
            prop_assert_eq!(rule.rounding_delta(m(a + k * grid)).unwrap().value(), d);
            prop_assert_eq!(d, rule.delta_by_residue()[(a % grid) as usize]);
        }
    }
}
