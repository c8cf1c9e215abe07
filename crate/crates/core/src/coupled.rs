//! Spatially-coupled chains: the coupled and modified (saturated) updates, the
//! coupled potential, the shift operator and saturation sweeps.
//!
//! Positions are numbered `1..=N_w` in reports and stored zero-based. Variable
//! (information) node groups sit at `1..=2N`.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelFamily;
use crate::de::{self, DeStatus, StopRule, ABSORB_ENTROPY};
use crate::ensemble::{EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};
use crate::measure::{self, gamma, gamma_tail_bound, GridSpec, HatMeasure};
use crate::potential::{self, CandidateStrategy, DERIVATIVE_ORDER};

/// Value read at positions outside the chain and used by the shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    DeltaInf,
    MinimalFixedPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoupledSpec {
    pub ensemble: EnsembleSpec,
    pub n: usize,
    pub w: usize,
    pub boundary: Boundary,
    pub saturate: bool,
    /// Replaces the default saturation position `N + ceil((w-1)/2)`.
    pub i0_override: Option<usize>,
}

impl CoupledSpec {
    /// The plain coupled chain with perfect boundary information.
    pub fn new(ensemble: EnsembleSpec, n: usize, w: usize) -> Result<Self> {
        if n == 0 || w == 0 {
            return Err(Error::Parameter(format!("coupled chain needs N >= 1 and w >= 1, got N={n}, w={w}")));
        }
        Ok(Self { ensemble, n, w, boundary: Boundary::DeltaInf, saturate: false, i0_override: None })
    }

    /// The modified system: saturated past `i0`, with the `f0` boundary for LDGM.
    pub fn modified(mut self) -> Self {
        self.saturate = true;
        if self.ensemble.kind == EnsembleKind::Ldgm {
            self.boundary = Boundary::MinimalFixedPoint;
        }
        self
    }

    pub fn with_i0(mut self, i0: usize) -> Result<Self> {
        if i0 == 0 || i0 > self.len() {
            return Err(Error::Parameter(format!("i0 = {i0} outside 1..={}", self.len())));
        }
        self.i0_override = Some(i0);
        Ok(self)
    }

    /// `N_w = 2N + w - 1`.
    pub fn len(&self) -> usize {
        2 * self.n + self.w - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// One-based saturation position.
    pub fn i0(&self) -> usize {
        self.i0_override.unwrap_or(self.n + self.w / 2)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainProfile {
    pub positions: Vec<HatMeasure>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PositionStats {
    pub position: usize,
    pub entropy: f64,
    pub error_prob: f64,
    pub bhattacharyya: f64,
}

impl ChainProfile {
    pub fn constant(x: &HatMeasure, len: usize) -> Self {
        Self { positions: vec![x.clone(); len] }
    }

    pub fn delta0(grid: GridSpec, len: usize) -> Self {
        Self::constant(&HatMeasure::delta0(grid), len)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// One-based access.
    pub fn at(&self, i: usize) -> &HatMeasure {
        &self.positions[i - 1]
    }

    pub fn entropies(&self) -> Vec<f64> {
        self.positions.iter().map(HatMeasure::entropy).collect()
    }

    pub fn max_entropy(&self) -> f64 {
        self.positions.iter().map(HatMeasure::entropy).fold(0.0, f64::max)
    }

    pub fn stats(&self) -> Vec<PositionStats> {
        self.positions
            .iter()
            .enumerate()
            .map(|(i, x)| PositionStats {
                position: i + 1,
                entropy: x.entropy(),
                error_prob: x.error_prob(),
                bhattacharyya: x.bhattacharyya(),
            })
            .collect()
    }

    /// `x_i == x_{N_w + 1 - i}` exactly.
    pub fn is_mirror_symmetric(&self) -> bool {
        let n = self.len();
        (0..n / 2).all(|i| self.positions[i] == self.positions[n - 1 - i])
    }

    /// Largest entropy distance between corresponding positions.
    pub fn max_distance(&self, other: &ChainProfile, order: usize) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::Precondition(format!("profile lengths differ: {} vs {}", self.len(), other.len())));
        }
        let upto =
            if self.is_mirror_symmetric() && other.is_mirror_symmetric() { self.len().div_ceil(2) } else { self.len() };
        let mut worst: f64 = 0.0;
        for (a, b) in self.positions[..upto].iter().zip(&other.positions) {
            worst = worst.max(a.entropy_distance(b, order)?.value);
        }
        Ok(worst)
    }

    /// Whether position `i` is degraded with respect to position `i - 1` everywhere.
    pub fn spatially_ordered(&self, slack: f64) -> Result<bool> {
        for pair in self.positions.windows(2) {
            if !pair[1].is_degraded(&pair[0], slack)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A coupled chain bound to one channel.
#[derive(Clone, Debug)]
pub struct CoupledSystem {
    pub spec: CoupledSpec,
    pub channel: HatMeasure,
    /// `Δ∞` or `f0(c)`, depending on the boundary.
    pub boundary_value: HatMeasure,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChainStep {
    pub iteration: usize,
    pub max_dh_step: f64,
    pub max_entropy: f64,
}

#[derive(Clone, Debug)]
pub struct CoupledTrace {
    pub steps: Vec<ChainStep>,
    pub terminal: ChainProfile,
    pub status: DeStatus,
    /// `(iteration, per-position stats)` every `snapshot_every` iterations and at the end.
    pub snapshots: Vec<(usize, Vec<PositionStats>)>,
}

impl CoupledTrace {
    pub fn iterations(&self) -> usize {
        self.steps.last().map_or(0, |s| s.iteration)
    }

    /// Every position reached the perfect-decoding point.
    pub fn absorbed(&self) -> bool {
        self.status == DeStatus::Absorbed
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoupledPotentialReport {
    pub value: f64,
    /// The single-position bracket, already scaled by `L'(1)`, for positions `1..=N_w`.
    pub position_terms: Vec<f64>,
    /// `-H(...)` of the variable-node output, for variable positions `1..=2N`.
    pub coupling_terms: Vec<f64>,
    /// The `f0` boundary correction (zero unless the boundary is the minimal fixed point).
    pub boundary_term: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShiftBound {
    /// `U_c(S(x)) - U_c(x)`.
    pub lhs: f64,
    /// `-U_s(x_i0)`, or `U_s(f0) - U_s(x_i0)` with the `f0` boundary.
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    /// `K / (2w)`, the bound on the second-order remainder along the shift.
    pub second_order_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShiftDerivative {
    pub value: f64,
    pub tail_bound: f64,
    pub order: usize,
}

impl CoupledSystem {
    /// Binds the spec to a channel, computing `f0(c)` when the boundary needs it.
    pub fn new(spec: CoupledSpec, channel: HatMeasure, stop: StopRule) -> Result<Self> {
        if spec.saturate && spec.i0() > spec.len() {
            return Err(Error::Parameter(format!("i0 = {} beyond chain length {}", spec.i0(), spec.len())));
        }
        let boundary_value = match spec.boundary {
            Boundary::DeltaInf => HatMeasure::delta_inf(channel.grid()),
            Boundary::MinimalFixedPoint => de::minimal_fixed_point(&spec.ensemble, &channel, stop)?,
        };
        Ok(Self { spec, channel, boundary_value })
    }

    fn check(&self, p: &ChainProfile) -> Result<()> {
        if p.len() != self.spec.len() {
            return Err(Error::Precondition(format!(
                "profile has {} positions, chain needs {}",
                p.len(),
                self.spec.len()
            )));
        }
        for x in &p.positions {
            x.same_grid(&self.channel)?;
        }
        Ok(())
    }

    /// Check-node output toward the variable side: `rho(x)` (LDPC) or `c ⊠ rho(x)` (LDGM).
    fn check_side(&self, x: &HatMeasure) -> Result<HatMeasure> {
        match self.spec.ensemble.kind {
            EnsembleKind::Ldpc => measure::poly_check(&self.spec.ensemble.rho, x),
            EnsembleKind::Ldgm => measure::check_conv_poly(Some(&self.channel), &self.spec.ensemble.rho, x),
        }
    }

    /// Variable-node output from an averaged input: `c ⊛ lambda(a)` (LDPC) or `lambda(a)` (LDGM).
    fn var_side(&self, a: &HatMeasure) -> Result<HatMeasure> {
        match self.spec.ensemble.kind {
            EnsembleKind::Ldpc => measure::var_conv_poly(Some(&self.channel), &self.spec.ensemble.lambda, a),
            EnsembleKind::Ldgm => measure::poly_var(&self.spec.ensemble.lambda, a),
        }
    }

    /// Updates positions `1..=upto` of the coupled map; the rest are left untouched.
    /// A mirror-symmetric input to the full update is folded: only the left half is
    /// evaluated and the right half is copied, which matches the full evaluation bit for bit.
    fn update(&self, p: &ChainProfile, upto: usize, saturated: bool, allow_fold: bool) -> Result<ChainProfile> {
        self.check(p)?;
        let (n, w, len) = (self.spec.n, self.spec.w, self.spec.len());
        let fold = allow_fold && !saturated && upto == len && p.is_mirror_symmetric();
        let half = len.div_ceil(2);
        let x_upto = if fold { half } else { upto };
        // Check outputs needed by variable positions v <= x_upto, i.e. p <= x_upto + w - 1.
        let need = (x_upto + w - 1).min(len);
        let sat_from = if saturated { self.spec.i0() } else { usize::MAX };
        let mut r: Vec<HatMeasure> = Vec::with_capacity(need);
        for i in 1..=need {
            let copy_of = if i > sat_from {
                Some(sat_from)
            } else if fold && i > half {
                Some(len + 1 - i)
            } else {
                None
            };
            match copy_of {
                Some(j) => {
                    let same = r[j - 1].clone();
                    r.push(same);
                }
                None => r.push(self.check_side(p.at(i))?),
            }
        }
        let last_v = x_upto.min(2 * n);
        let mut z: Vec<HatMeasure> = Vec::with_capacity(last_v);
        for v in 1..=last_v {
            if fold && v > n {
                let same = z[2 * n - v].clone();
                z.push(same);
                continue;
            }
            let parts: Vec<&HatMeasure> = r[v - 1..v - 1 + w].iter().collect();
            z.push(self.var_side(&measure::average(&parts)?)?);
        }
        let mut out = p.positions.clone();
        for i in 1..=x_upto {
            let parts: Vec<&HatMeasure> = (0..w)
                .map(|k| {
                    let v = i as isize - k as isize;
                    if v >= 1 && v as usize <= 2 * n {
                        &z[v as usize - 1]
                    } else {
                        &self.boundary_value
                    }
                })
                .collect();
            out[i - 1] = measure::average(&parts)?;
        }
        if fold {
            for i in half + 1..=len {
                out[i - 1] = out[len - i].clone();
            }
        }
        Ok(ChainProfile { positions: out })
    }

    /// One synchronous update of every position, ignoring the saturation flag.
    pub fn coupled_step(&self, p: &ChainProfile) -> Result<ChainProfile> {
        self.update(p, self.spec.len(), false, true)
    }

    /// Update positions `1..=i0`, then copy `x_i0` to every later position.
    pub fn modified_step(&self, p: &ChainProfile) -> Result<ChainProfile> {
        let i0 = self.spec.i0();
        let mut out = self.update(p, i0, true, false)?;
        let top = out.positions[i0 - 1].clone();
        for x in &mut out.positions[i0..] {
            *x = top.clone();
        }
        Ok(out)
    }

    /// The update selected by the spec's saturation flag.
    pub fn step(&self, p: &ChainProfile) -> Result<ChainProfile> {
        if self.spec.saturate {
            self.modified_step(p)
        } else {
            self.coupled_step(p)
        }
    }

    /// Iterates until the largest per-position entropy-distance step falls below
    /// `stop.tol_dh`, or every position drops below the absorption entropy.
    pub fn fixed_point(
        &self,
        p0: &ChainProfile,
        stop: StopRule,
        snapshot_every: Option<usize>,
    ) -> Result<CoupledTrace> {
        self.check(p0)?;
        let absorb = stop.absorb_below.unwrap_or(ABSORB_ENTROPY);
        let mut x = p0.clone();
        let mut steps = vec![ChainStep { iteration: 0, max_dh_step: f64::NAN, max_entropy: x.max_entropy() }];
        let mut snapshots = Vec::new();
        if snapshot_every.is_some() {
            snapshots.push((0, x.stats()));
        }
        let mut status = DeStatus::MaxIterReached;
        for it in 1..=stop.max_iter {
            let next = self.step(&x)?;
            let dh = next.max_distance(&x, stop.order)?;
            x = next;
            let max_entropy = x.max_entropy();
            steps.push(ChainStep { iteration: it, max_dh_step: dh, max_entropy });
            if let Some(every) = snapshot_every {
                if every > 0 && it % every == 0 {
                    snapshots.push((it, x.stats()));
                }
            }
            if max_entropy < absorb && self.boundary_value.atom1() == 1.0 {
                status = DeStatus::Absorbed;
                break;
            }
            if dh < stop.tol_dh {
                status = DeStatus::Converged;
                break;
            }
        }
        let last = steps.last().map_or(0, |s| s.iteration);
        if snapshot_every.is_some() && snapshots.last().is_none_or(|(i, _)| *i != last) {
            snapshots.push((last, x.stats()));
        }
        Ok(CoupledTrace { steps, terminal: x, status, snapshots })
    }

    /// The coupled potential; the `f0` boundary terms appear only with that boundary.
    pub fn potential(&self, p: &ChainProfile) -> Result<CoupledPotentialReport> {
        self.check(p)?;
        let e = &self.spec.ensemble;
        let k = e.constants();
        let (n, w) = (self.spec.n, self.spec.w);
        let c = &self.channel;
        let ldgm = e.kind == EnsembleKind::Ldgm;
        let mut r = Vec::with_capacity(p.len());
        let mut position_terms = Vec::with_capacity(p.len());
        for x in &p.positions {
            let ri = self.check_side(x)?;
            let big_r = if ldgm {
                measure::check_conv_poly(Some(c), &e.r_node, x)?
            } else {
                measure::poly_check(&e.r_node, x)?
            };
            let xr = measure::check_conv(x, &ri)?;
            let mut bracket = big_r.entropy() / k.r_d1_1 + ri.entropy() - xr.entropy();
            if ldgm {
                bracket -= c.entropy() / k.r_d1_1;
            }
            position_terms.push(k.l_d1_1 * bracket);
            r.push(ri);
        }
        let mut coupling_terms = Vec::with_capacity(2 * n);
        for v in 1..=2 * n {
            let parts: Vec<&HatMeasure> = r[v - 1..v - 1 + w].iter().collect();
            let avg = measure::average(&parts)?;
            let out = match e.kind {
                EnsembleKind::Ldpc => measure::var_conv_poly(Some(c), &e.l_node, &avg)?,
                EnsembleKind::Ldgm => measure::poly_var(&e.l_node, &avg)?,
            };
            coupling_terms.push(-out.entropy());
        }
        let mut boundary_term = 0.0;
        if self.spec.boundary == Boundary::MinimalFixedPoint {
            let f0 = &self.boundary_value;
            for i in 1..w {
                let left = measure::var_conv(f0, &r[i - 1])?.entropy();
                let right = measure::var_conv(f0, &r[2 * n + i - 1])?.entropy();
                boundary_term -= k.l_d1_1 * (((w - i) as f64 / w as f64) * left + (i as f64 / w as f64) * right);
            }
        }
        let value = position_terms.iter().sum::<f64>() + coupling_terms.iter().sum::<f64>() + boundary_term;
        Ok(CoupledPotentialReport { value, position_terms, coupling_terms, boundary_term })
    }

    /// `[S(x)]_1` is the boundary value, `[S(x)]_i = x_{i-1}`.
    pub fn shift(&self, p: &ChainProfile) -> ChainProfile {
        shift(p, &self.boundary_value)
    }

    /// Both sides of the shift bound at a saturated profile.
    pub fn shift_bound(&self, p: &ChainProfile, tol: f64) -> Result<ShiftBound> {
        self.check(p)?;
        let i0 = self.spec.i0();
        let top = p.at(i0);
        if p.positions[i0..].iter().any(|x| x != top) {
            return Err(Error::Precondition(format!("profile is not saturated past i0 = {i0}")));
        }
        let e = &self.spec.ensemble;
        let rhs = match self.spec.boundary {
            Boundary::DeltaInf => -potential::potential_value(e, top, &self.channel)?,
            Boundary::MinimalFixedPoint => {
                if i0 > 2 * self.spec.n {
                    return Err(Error::Precondition(format!("the f0 shift bound needs i0 <= 2N, got i0 = {i0}")));
                }
                potential::potential_value(e, &self.boundary_value, &self.channel)?
                    - potential::potential_value(e, top, &self.channel)?
            }
        };
        let lhs = self.potential(&self.shift(p))?.value - self.potential(p)?.value;
        Ok(ShiftBound {
            lhs,
            rhs,
            slack: rhs - lhs,
            holds: lhs <= rhs + tol,
            second_order_bound: e.constants().k / (2.0 * self.spec.w as f64),
        })
    }

    /// `d U_c(x)[S(x) - x]` through the moment series, using the unsaturated update
    /// with this system's boundary.
    pub fn shift_derivative(&self, p: &ChainProfile) -> Result<ShiftDerivative> {
        let order = DERIVATIVE_ORDER;
        let t = self.coupled_step(p)?;
        let s = self.shift(p);
        let e = &self.spec.ensemble;
        let k = e.constants();
        let mc = (e.kind == EnsembleKind::Ldgm).then(|| self.channel.moments(order));
        let mut sum = 0.0;
        let mut tail = 0.0;
        for i in 0..p.len() {
            let x = &p.positions[i];
            let (dt, tail_t) = potential::moment_difference(&t.positions[i], x, order)?;
            let (dy, _) = potential::moment_difference(&s.positions[i], x, order)?;
            let mx = x.moments(order);
            for q in 0..order {
                let factor = mc.as_ref().map_or(1.0, |m| m[q]);
                sum += gamma(q + 1) * dt[q] * factor * e.rho.eval_d1(mx[q]) * dy[q];
            }
            tail += tail_t;
        }
        Ok(ShiftDerivative {
            value: -k.l_d1_1 * sum,
            tail_bound: k.l_d1_1 * k.rho_d1_1 * tail * gamma_tail_bound(order),
            order,
        })
    }
}

/// Right shift inserting `first` at position 1.
pub fn shift(p: &ChainProfile, first: &HatMeasure) -> ChainProfile {
    let mut positions = Vec::with_capacity(p.len());
    if !p.is_empty() {
        positions.push(first.clone());
        positions.extend(p.positions[..p.len() - 1].iter().cloned());
    }
    ChainProfile { positions }
}

pub fn write_profile_csv<W: Write>(trace: &CoupledTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "position", "H", "E", "B"])?;
    for (it, stats) in &trace.snapshots {
        for s in stats {
            w.write_record([
                it.to_string(),
                s.position.to_string(),
                format!("{:.10e}", s.entropy),
                format!("{:.10e}", s.error_prob),
                format!("{:.10e}", s.bhattacharyya),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepCell {
    pub n: usize,
    pub w: usize,
    pub h: f64,
    pub status: DeStatus,
    pub iterations: usize,
    pub terminal_max_entropy: f64,
    pub seconds: f64,
}

impl SweepCell {
    /// Every position reached the perfect-decoding point (LDPC) or `f0` (LDGM).
    pub fn saturated(&self) -> bool {
        self.status == DeStatus::Absorbed
    }
}

/// Per `(N, w)`: largest grid entropy below which every run succeeded.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WidthThreshold {
    pub n: usize,
    pub w: usize,
    pub empirical: Option<f64>,
}

/// Per `h`: the width that the energy-gap argument guarantees, next to the
/// smallest swept width that actually worked.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WidthBound {
    pub h: f64,
    /// `None` encodes an infinite gap.
    pub energy_gap: Option<f64>,
    /// `K / (2 ΔE)`; zero for an infinite gap, absent for a non-positive one.
    pub k_over_2gap: Option<f64>,
    /// Smallest integer width above `K / (2 ΔE)`.
    pub sufficient_w: Option<usize>,
    /// Smallest swept width that saturated at this `h`, over every `N`.
    pub empirical_w: Option<usize>,
    /// `sufficient_w >= empirical_w` when both exist.
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub k: f64,
    pub cells: Vec<SweepCell>,
    pub thresholds: Vec<WidthThreshold>,
    pub width_bounds: Vec<WidthBound>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepOptions {
    pub stop: StopRule,
    /// Run the modified system instead of the plain chain.
    pub modified: bool,
    /// Energy gaps for the width bound; `None` skips the bound.
    pub gap_strategy: Option<CandidateStrategy>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            stop: StopRule {
                tol_dh: 1e-9,
                max_iter: 20_000,
                absorb_below: Some(ABSORB_ENTROPY),
                ..StopRule::default()
            },
            modified: false,
            gap_strategy: Some(CandidateStrategy::default()),
        }
    }
}

/// Runs every `(N, w, h)` cell from `Δ0` and summarizes thresholds and width bounds.
pub fn saturation_sweep(
    e: &EnsembleSpec,
    family: ChannelFamily,
    ns: &[usize],
    ws: &[usize],
    hs: &[f64],
    opts: &SweepOptions,
) -> Result<SweepReport> {
    let grid = family.grid;
    let channels: Vec<HatMeasure> = hs.iter().map(|&h| family.density(h)).collect::<Result<_>>()?;
    let mut cells = Vec::new();
    for &n in ns {
        for &w in ws {
            let mut spec = CoupledSpec::new(e.clone(), n, w)?;
            if opts.modified {
                spec = spec.modified();
            }
            for (&h, c) in hs.iter().zip(&channels) {
                let start = Instant::now();
                let sys = CoupledSystem::new(spec.clone(), c.clone(), opts.stop)?;
                let trace = sys.fixed_point(&ChainProfile::delta0(grid, spec.len()), opts.stop, None)?;
                let status = absorbed_or(&sys, &trace, opts.stop)?;
                cells.push(SweepCell {
                    n,
                    w,
                    h,
                    status,
                    iterations: trace.iterations(),
                    terminal_max_entropy: trace.terminal.max_entropy(),
                    seconds: start.elapsed().as_secs_f64(),
                });
            }
        }
    }
    let mut thresholds = Vec::new();
    for &n in ns {
        for &w in ws {
            let mut runs: Vec<&SweepCell> = cells.iter().filter(|c| c.n == n && c.w == w).collect();
            runs.sort_by(|a, b| a.h.total_cmp(&b.h));
            let empirical = runs.iter().take_while(|c| c.saturated()).last().map(|c| c.h);
            thresholds.push(WidthThreshold { n, w, empirical });
        }
    }
    let k = e.constants().k;
    let mut width_bounds = Vec::new();
    if let Some(strategy) = &opts.gap_strategy {
        for (&h, c) in hs.iter().zip(&channels) {
            let gap = potential::energy_gap(e, c, strategy)?;
            let (k_over, sufficient) = match gap.gap {
                None => (Some(0.0), Some(1)),
                Some(g) if g > 0.0 => {
                    let q = k / (2.0 * g);
                    (Some(q), Some(q.floor() as usize + 1))
                }
                Some(_) => (None, None),
            };
            let empirical_w = cells.iter().filter(|x| x.h == h && x.saturated()).map(|x| x.w).min();
            let consistent = match (sufficient, empirical_w) {
                (Some(s), Some(m)) => s >= m,
                _ => true,
            };
            width_bounds.push(WidthBound {
                h,
                energy_gap: gap.gap,
                k_over_2gap: k_over,
                sufficient_w: sufficient,
                empirical_w,
                consistent,
            });
        }
    }
    Ok(SweepReport { k, cells, thresholds, width_bounds })
}

/// For the `f0` boundary, "absorbed" means every position ended within the basin distance of `f0`.
fn absorbed_or(sys: &CoupledSystem, trace: &CoupledTrace, stop: StopRule) -> Result<DeStatus> {
    if sys.boundary_value.atom1() == 1.0 || trace.status != DeStatus::Converged {
        return Ok(trace.status);
    }
    let f0 = &sys.boundary_value;
    for x in &trace.terminal.positions {
        if x.entropy_distance(f0, stop.order)?.value >= de::BASIN_DISTANCE {
            return Ok(DeStatus::Converged);
        }
    }
    Ok(DeStatus::Absorbed)
}

pub fn write_sweep_csv<W: Write>(report: &SweepReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "w", "h", "status", "iterations", "terminal_max_H"])?;
    for c in &report.cells {
        let status = match c.status {
            DeStatus::Absorbed => "absorbed",
            DeStatus::Converged => "converged",
            DeStatus::MaxIterReached => "max_iter",
        };
        w.write_record([
            c.n.to_string(),
            c.w.to_string(),
            format!("{:.6}", c.h),
            status.to_string(),
            c.iterations.to_string(),
            format!("{:.6e}", c.terminal_max_entropy),
        ])?;
    }
    w.flush()?;
    Ok(())
}
