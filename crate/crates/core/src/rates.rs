//! Relaxation constants and their realization as Lindblad channels.
//!
//! A coherence ρ_ij decays at (Γ_i + Γ_j)/2 from population decay alone,
//! where Γ_i is the total decay rate out of state i. Any excess requested
//! rate is supplied by diagonal (pure-dephasing) collapse operators. A set of
//! diagonal operators C_k = Σ_i x_ik |i⟩⟨i| dephases the pair (i, j) at
//! ½‖x_i − x_j‖², so the requested dephasing rates must form a squared
//! Euclidean distance matrix; the coordinates are recovered by classical
//! multidimensional scaling.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::dipole_ea_to_si;
use crate::error::{invalid, Error, Result};
use crate::linalg::{ket_bra, CMatrix};
use crate::scheme::LevelScheme;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceRate {
    pub i: String,
    pub j: String,
    /// 1/s
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationDecay {
    pub from: String,
    pub to: String,
    /// 1/s
    pub rate: f64,
}

/// All relaxation constants of a model plus the transition dipole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSet {
    pub coherences: Vec<CoherenceRate>,
    pub decays: Vec<PopulationDecay>,
    /// e·Å
    pub dipole_ea: f64,
}

impl Default for RateSet {
    fn default() -> Self {
        RateSet {
            coherences: Vec::new(),
            decays: Vec::new(),
            dipole_ea: 6.0,
        }
    }
}

fn same_pair(c: &CoherenceRate, i: &str, j: &str) -> bool {
    (c.i == i && c.j == j) || (c.i == j && c.j == i)
}

impl RateSet {
    /// Sets (or replaces) the decay rate of coherence ρ_ij.
    pub fn with_coherence(mut self, i: &str, j: &str, gamma: f64) -> Self {
        self.set_coherence(i, j, gamma);
        self
    }

    pub fn set_coherence(&mut self, i: &str, j: &str, gamma: f64) {
        match self.coherences.iter_mut().find(|c| same_pair(c, i, j)) {
            Some(c) => c.gamma = gamma,
            None => self.coherences.push(CoherenceRate {
                i: i.to_string(),
                j: j.to_string(),
                gamma,
            }),
        }
    }

    /// Adds (or replaces) population decay `from` → `to`.
    pub fn with_decay(mut self, from: &str, to: &str, rate: f64) -> Self {
        self.set_decay(from, to, rate);
        self
    }

    pub fn set_decay(&mut self, from: &str, to: &str, rate: f64) {
        match self.decays.iter_mut().find(|d| d.from == from && d.to == to) {
            Some(d) => d.rate = rate,
            None => self.decays.push(PopulationDecay {
                from: from.to_string(),
                to: to.to_string(),
                rate,
            }),
        }
    }

    pub fn coherence(&self, i: &str, j: &str) -> Option<f64> {
        self.coherences.iter().find(|c| same_pair(c, i, j)).map(|c| c.gamma)
    }

    pub fn decay(&self, from: &str, to: &str) -> Option<f64> {
        self.decays
            .iter()
            .find(|d| d.from == from && d.to == to)
            .map(|d| d.rate)
    }

    /// Total population decay rate out of `state`.
    pub fn total_decay(&self, state: &str) -> f64 {
        self.decays.iter().filter(|d| d.from == state).map(|d| d.rate).sum()
    }

    pub fn dipole_si(&self) -> f64 {
        dipole_ea_to_si(self.dipole_ea)
    }

    pub fn validate(&self) -> Result<()> {
        for c in &self.coherences {
            if !(c.gamma >= 0.0 && c.gamma.is_finite()) {
                return Err(invalid(
                    format!("gamma_{}{}", c.i, c.j),
                    format!("must be finite and >= 0, got {}", c.gamma),
                ));
            }
            if c.i == c.j {
                return Err(invalid(format!("gamma_{}{}", c.i, c.j), "pair must join two states"));
            }
        }
        for (k, c) in self.coherences.iter().enumerate() {
            if self.coherences[..k].iter().any(|o| same_pair(o, &c.i, &c.j)) {
                return Err(invalid(format!("gamma_{}{}", c.i, c.j), "given twice"));
            }
        }
        for d in &self.decays {
            if !(d.rate >= 0.0 && d.rate.is_finite()) {
                return Err(invalid(
                    format!("decay {}->{}", d.from, d.to),
                    format!("must be finite and >= 0, got {}", d.rate),
                ));
            }
            if d.from == d.to {
                return Err(invalid(format!("decay {}->{}", d.from, d.to), "self decay"));
            }
        }
        if !(self.dipole_ea > 0.0 && self.dipole_ea.is_finite()) {
            return Err(invalid("dipole", format!("must be positive, got {}", self.dipole_ea)));
        }
        Ok(())
    }
}

/// One collapse operator with its rate folded in: D[C]ρ = CρC† − ½{C†C, ρ}.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladChannel {
    pub label: String,
    pub op: CMatrix,
}

/// Relative slack when checking realizability, to absorb rounding in rate arithmetic.
const REALIZABILITY_TOL: f64 = 1e-12;

/// Collapse operators realizing the population decays and every requested coherence rate.
pub fn build_dissipator(scheme: &LevelScheme, rates: &RateSet) -> Result<Vec<LindbladChannel>> {
    rates.validate()?;
    let n = scheme.dim();
    let mut channels = Vec::new();
    let mut out_rate = vec![0.0; n];

    for d in &rates.decays {
        let from = scheme.index_of(&d.from)?;
        let to = scheme.index_of(&d.to)?;
        out_rate[from] += d.rate;
        if d.rate > 0.0 {
            channels.push(LindbladChannel {
                label: format!("decay {}->{}", d.from, d.to),
                op: ket_bra(n, to, from).scale(d.rate.sqrt()),
            });
        }
    }

    // Squared dephasing distances 2·γ_deph for requested pairs.
    let mut known: Vec<Vec<Option<f64>>> = vec![vec![None; n]; n];
    for i in 0..n {
        known[i][i] = Some(0.0);
    }
    for c in &rates.coherences {
        let i = scheme.index_of(&c.i)?;
        let j = scheme.index_of(&c.j)?;
        let minimum = 0.5 * (out_rate[i] + out_rate[j]);
        let deph = c.gamma - minimum;
        if deph < -REALIZABILITY_TOL * minimum.max(c.gamma) {
            return Err(Error::UnrealizableCoherence {
                pair: format!("{}{}", c.i, c.j),
                requested: c.gamma,
                minimum,
            });
        }
        let sq = 2.0 * deph.max(0.0);
        known[i][j] = Some(sq);
        known[j][i] = Some(sq);
    }

    for (states, coords) in dephasing_embedding(&known)? {
        for (k, col) in coords.column_iter().enumerate() {
            if col.iter().all(|&x| x == 0.0) {
                continue;
            }
            let mut op = CMatrix::zeros(n, n);
            for (local, &s) in states.iter().enumerate() {
                op[(s, s)] = Complex64::new(col[local], 0.0);
            }
            let names: Vec<_> = states.iter().map(|&s| scheme.states[s].as_str()).collect();
            channels.push(LindbladChannel {
                label: format!("dephasing {} #{k}", names.join("")),
                op,
            });
        }
    }

    // Round-trip check on the realized rates.
    for c in &rates.coherences {
        let i = scheme.index_of(&c.i)?;
        let j = scheme.index_of(&c.j)?;
        let realized = realized_coherence_rate(&channels, i, j);
        if (realized - c.gamma).abs() > 1e-9 * c.gamma.max(1e-300) && c.gamma > 0.0 {
            return Err(Error::UnrealizableDephasing {
                states: format!("{}{} (realized {realized:e} /s)", c.i, c.j),
            });
        }
    }
    Ok(channels)
}

/// Decay rate of ρ_ij under the given channels with no Hamiltonian.
pub fn realized_coherence_rate(channels: &[LindbladChannel], i: usize, j: usize) -> f64 {
    // D[C] acting on |i⟩⟨j| has ⟨i|·|j⟩ component C_ii C_jj* − ½((C†C)_ii + (C†C)_jj).
    let mut rate = 0.0;
    for ch in channels {
        let c = &ch.op;
        let cdc = c.adjoint() * c;
        let feed = c[(i, i)] * c[(j, j)].conj();
        rate += 0.5 * (cdc[(i, i)].re + cdc[(j, j)].re) - feed.re;
    }
    rate
}

/// Per connected group of requested pairs, coordinates whose pairwise halved
/// squared distances equal the requested dephasing rates.
fn dephasing_embedding(known: &[Vec<Option<f64>>]) -> Result<Vec<(Vec<usize>, DMatrix<f64>)>> {
    let n = known.len();
    let mut group = (0..n).collect::<Vec<_>>();
    fn find(g: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while g[r] != r {
            r = g[r];
        }
        g[x] = r;
        r
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && known[i][j].is_some() {
                let (ri, rj) = (find(&mut group, i), find(&mut group, j));
                group[ri] = rj;
            }
        }
    }
    let mut out = Vec::new();
    for root in 0..n {
        let states: Vec<usize> = (0..n).filter(|&s| find(&mut group, s) == root).collect();
        if states.len() < 2 {
            continue;
        }
        let m = states.len();
        // Complete unknown distances by shortest paths over known ones.
        let mut dist = DMatrix::from_fn(m, m, |a, b| {
            known[states[a]][states[b]].map_or(f64::INFINITY, f64::sqrt)
        });
        for k in 0..m {
            for a in 0..m {
                for b in 0..m {
                    let via = dist[(a, k)] + dist[(k, b)];
                    if via < dist[(a, b)] {
                        dist[(a, b)] = via;
                    }
                }
            }
        }
        // Requested pairs keep their values; a shorter path means a violated
        // triangle inequality, which the Gram test below rejects.
        for a in 0..m {
            for b in 0..m {
                if let Some(v) = known[states[a]][states[b]] {
                    dist[(a, b)] = v.sqrt();
                }
            }
        }
        let sq = dist.map(|x| x * x);
        if sq.iter().all(|&x| x == 0.0) {
            continue;
        }
        // Gram matrix of centred coordinates: G = −½ J D J.
        let centring = DMatrix::from_fn(m, m, |a, b| (a == b) as u8 as f64 - 1.0 / m as f64);
        let gram = (&centring * &sq * &centring).scale(-0.5);
        let eig = gram.symmetric_eigen();
        let scale = eig.eigenvalues.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        if eig.eigenvalues.iter().any(|&l| l < -1e-10 * scale) {
            let names = states.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
            return Err(Error::UnrealizableDephasing { states: names });
        }
        let mut coords = DMatrix::zeros(m, m);
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l > 1e-14 * scale {
                let s = l.sqrt();
                for a in 0..m {
                    coords[(a, k)] = eig.eigenvectors[(a, k)] * s;
                }
            }
        }
        // Shift so the first state of the group is at the origin; operators then
        // act trivially on it, which keeps the matrices sparse.
        let origin = coords.row(0).clone_owned();
        for a in 0..m {
            let shifted = coords.row(a) - &origin;
            coords.set_row(a, &shifted);
        }
        out.push((states, coords));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{build_scheme, SchemeKind, SchemeParams};

    fn lambda() -> LevelScheme {
        build_scheme(SchemeKind::Lambda, &SchemeParams::default()).unwrap()
    }

    #[test]
    fn zero_rates_give_no_channels() {
        let rates = RateSet::default()
            .with_coherence("a", "b", 0.0)
            .with_decay("a", "b", 0.0);
        assert!(build_dissipator(&lambda(), &rates).unwrap().is_empty());
        assert!(build_dissipator(&lambda(), &RateSet::default()).unwrap().is_empty());
    }

    #[test]
    fn coherence_below_half_population_rate_is_rejected() {
        let rates = RateSet::default()
            .with_coherence("a", "b", 1e12)
            .with_decay("a", "b", 3e12);
        match build_dissipator(&lambda(), &rates) {
            Err(Error::UnrealizableCoherence { pair, .. }) => assert_eq!(pair, "ab"),
            other => panic!("expected realizability error, got {other:?}"),
        }
    }

    #[test]
    fn boundary_case_is_pure_decay() {
        // γ_ab exactly equal to half the population decay rate needs no dephasing.
        let rates = RateSet::default()
            .with_coherence("a", "b", 1e12)
            .with_decay("a", "b", 2e12);
        let ch = build_dissipator(&lambda(), &rates).unwrap();
        assert_eq!(ch.len(), 1);
        assert!((realized_coherence_rate(&ch, 0, 1) / 1e12 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn realized_rates_match_requests() {
        let rates = RateSet::default()
            .with_coherence("a", "b", 1e12)
            .with_coherence("a", "c", 1.001e12)
            .with_coherence("c", "b", 1e6)
            .with_decay("a", "b", 5e11)
            .with_decay("a", "c", 5e11)
            .with_decay("c", "b", 1e6);
        let ch = build_dissipator(&lambda(), &rates).unwrap();
        for (i, j, g) in [(0, 1, 1e12), (0, 2, 1.001e12), (2, 1, 1e6)] {
            let r = realized_coherence_rate(&ch, i, j);
            assert!((r / g - 1.0).abs() < 1e-9, "pair {i}{j}: {r} vs {g}");
        }
    }

    #[test]
    fn triangle_violation_is_unrealizable() {
        // Dephasing ab and ac both zero forces bc to zero as well.
        let rates = RateSet::default()
            .with_coherence("a", "b", 0.0)
            .with_coherence("a", "c", 0.0)
            .with_coherence("b", "c", 1e6);
        assert!(matches!(
            build_dissipator(&lambda(), &rates),
            Err(Error::UnrealizableDephasing { .. })
        ));
    }

    #[test]
    fn long_edge_violation_is_unrealizable() {
        // √(2·8e11) > √(2·5e11) + √(2·5e5)
        let rates = RateSet::default()
            .with_coherence("a", "b", 1e12)
            .with_coherence("a", "c", 1.3e12)
            .with_coherence("c", "b", 1e6)
            .with_decay("a", "b", 5e11)
            .with_decay("a", "c", 5e11);
        assert!(matches!(
            build_dissipator(&lambda(), &rates),
            Err(Error::UnrealizableDephasing { .. })
        ));
    }

    #[test]
    fn partial_specification_is_completed() {
        let rates = RateSet::default()
            .with_coherence("a", "b", 1e12)
            .with_decay("a", "b", 1e12);
        let ch = build_dissipator(&lambda(), &rates).unwrap();
        assert!((realized_coherence_rate(&ch, 0, 1) / 1e12 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_label_and_negative_rate() {
        let r = RateSet::default().with_coherence("a", "z", 1.0);
        assert!(matches!(build_dissipator(&lambda(), &r), Err(Error::UnknownState(_))));
        let r = RateSet::default().with_decay("a", "b", -1.0);
        assert!(build_dissipator(&lambda(), &r).is_err());
    }
}
