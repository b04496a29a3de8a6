//! Occupation-number basis for spin-1/2 fermions on a chain.
//!
//! Mode `2j` is spin-up at site `j` and mode `2j + 1` is spin-down at site
//! `j`. Fermionic signs follow from this site-major ordering: an operator on
//! mode `k` picks up `(-1)^(occupied modes below k)`.

use std::fmt;

use crate::{Error, Result};

/// Largest supported chain; 32 modes fit one `u32`.
pub const MAX_SITES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    fn offset(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

/// The four states a single site can be in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocalState {
    Empty,
    Up,
    Down,
    Double,
}

impl LocalState {
    pub const ALL: [LocalState; 4] = [LocalState::Empty, LocalState::Up, LocalState::Down, LocalState::Double];

    /// Position in the `(0, up, down, updown)` ordering.
    pub fn index(self) -> usize {
        self as usize
    }

    fn from_pair(pair: u32) -> Self {
        match pair & 0b11 {
            0b00 => LocalState::Empty,
            0b01 => LocalState::Up,
            0b10 => LocalState::Down,
            _ => LocalState::Double,
        }
    }

    fn pair(self) -> u32 {
        match self {
            LocalState::Empty => 0b00,
            LocalState::Up => 0b01,
            LocalState::Down => 0b10,
            LocalState::Double => 0b11,
        }
    }
}

/// A basis state of `2L` fermionic modes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    bits: u32,
    sites: u8,
}

impl FockState {
    pub fn new(bits: u32, sites: usize) -> Result<Self> {
        check_sites(sites)?;
        if sites < MAX_SITES && bits >> (2 * sites) != 0 {
            return Err(Error::domain(format!(
                "bits {bits:#x} use modes beyond {} sites",
                sites
            )));
        }
        Ok(FockState {
            bits,
            sites: sites as u8,
        })
    }

    pub fn vacuum(sites: usize) -> Result<Self> {
        Self::new(0, sites)
    }

    pub fn from_sites(locals: &[LocalState]) -> Result<Self> {
        check_sites(locals.len())?;
        let bits = locals
            .iter()
            .enumerate()
            .fold(0u32, |acc, (j, s)| acc | (s.pair() << (2 * j)));
        Ok(FockState {
            bits,
            sites: locals.len() as u8,
        })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn sites(self) -> usize {
        self.sites as usize
    }

    pub fn mode(site: usize, spin: Spin) -> usize {
        2 * site + spin.offset()
    }

    pub fn is_occupied(self, site: usize, spin: Spin) -> bool {
        self.bits >> Self::mode(site, spin) & 1 == 1
    }

    pub fn local(self, site: usize) -> LocalState {
        LocalState::from_pair(self.bits >> (2 * site))
    }

    pub fn count(self, spin: Spin) -> u32 {
        let mask = match spin {
            Spin::Up => 0x5555_5555u32,
            Spin::Down => 0xAAAA_AAAAu32,
        };
        (self.bits & mask).count_ones()
    }

    pub fn particles(self) -> u32 {
        self.bits.count_ones()
    }

    /// Number of doubly occupied sites.
    pub fn doublons(self) -> u32 {
        (self.bits & (self.bits >> 1) & 0x5555_5555).count_ones()
    }

    fn sign_below(self, mode: usize) -> f64 {
        let below = self.bits & ((1u32 << mode) - 1);
        if below.count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `c_{site,spin}` applied to this state, or `None` if the mode is empty.
    pub fn annihilate(self, site: usize, spin: Spin) -> Option<(FockState, f64)> {
        debug_assert!(site < self.sites());
        let mode = Self::mode(site, spin);
        if self.bits >> mode & 1 == 0 {
            return None;
        }
        let sign = self.sign_below(mode);
        Some((
            FockState {
                bits: self.bits & !(1 << mode),
                sites: self.sites,
            },
            sign,
        ))
    }

    /// `c^dagger_{site,spin}` applied to this state, or `None` if the mode is
    /// already occupied.
    pub fn create(self, site: usize, spin: Spin) -> Option<(FockState, f64)> {
        debug_assert!(site < self.sites());
        let mode = Self::mode(site, spin);
        if self.bits >> mode & 1 == 1 {
            return None;
        }
        let sign = self.sign_below(mode);
        Some((
            FockState {
                bits: self.bits | (1 << mode),
                sites: self.sites,
            },
            sign,
        ))
    }

    /// `c^dagger_{to} c_{from}` for one spin species.
    pub fn hop(self, to: usize, from: usize, spin: Spin) -> Option<(FockState, f64)> {
        let (mid, s1) = self.annihilate(from, spin)?;
        let (out, s2) = mid.create(to, spin)?;
        Some((out, s1 * s2))
    }
}

impl fmt::Debug for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        for j in 0..self.sites() {
            let c = match self.local(j) {
                LocalState::Empty => '0',
                LocalState::Up => 'u',
                LocalState::Down => 'd',
                LocalState::Double => '2',
            };
            write!(f, "{c}")?;
        }
        f.write_str(">")
    }
}

fn check_sites(sites: usize) -> Result<()> {
    if sites == 0 || sites > MAX_SITES {
        return Err(Error::domain(format!("site count {sites} outside 1..={MAX_SITES}")));
    }
    Ok(())
}

/// All basis states with fixed numbers of up and down fermions, sorted by
/// their bit pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sector {
    sites: usize,
    n_up: usize,
    n_down: usize,
    states: Vec<FockState>,
}

impl Sector {
    pub fn enumerate(sites: usize, n_up: usize, n_down: usize) -> Result<Self> {
        check_sites(sites)?;
        if n_up > sites || n_down > sites {
            return Err(Error::domain(format!(
                "particle counts ({n_up}, {n_down}) exceed {sites} sites"
            )));
        }
        let ups = spread(&combinations(sites, n_up), 0);
        let downs = spread(&combinations(sites, n_down), 1);
        let mut states: Vec<FockState> = ups
            .iter()
            .flat_map(|&u| {
                downs.iter().map(move |&d| FockState {
                    bits: u | d,
                    sites: sites as u8,
                })
            })
            .collect();
        states.sort_unstable();
        Ok(Sector {
            sites,
            n_up,
            n_down,
            states,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn n_up(&self) -> usize {
        self.n_up
    }

    pub fn n_down(&self) -> usize {
        self.n_down
    }

    pub fn particles(&self) -> usize {
        self.n_up + self.n_down
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn index_of(&self, state: FockState) -> Option<usize> {
        if state.sites() != self.sites {
            return None;
        }
        self.states.binary_search(&state).ok()
    }
}

/// Every `n`-bit subset of `sites` bits, via Gosper's hack.
fn combinations(sites: usize, n: usize) -> Vec<u32> {
    if n == 0 {
        return vec![0];
    }
    let limit = 1u64 << sites;
    let mut out = Vec::new();
    let mut v: u64 = (1u64 << n) - 1;
    while v < limit {
        out.push(v as u32);
        let t = v | (v - 1);
        v = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
    }
    out
}

/// Maps site bit `j` to mode bit `2j + offset`.
fn spread(masks: &[u32], offset: u32) -> Vec<u32> {
    masks
        .iter()
        .map(|&m| {
            (0..32u32)
                .filter(|j| m >> j & 1 == 1)
                .fold(0u32, |acc, j| acc | 1 << (2 * j + offset))
        })
        .collect()
}
