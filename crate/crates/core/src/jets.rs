//! Sequential-recombination jet clustering, declustering into prongs and
//! prong momentum fractions.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Rapidity assigned to momenta with `E ≤ |pz|`.
const MAX_RAPIDITY: f64 = 1e5;

/// A four-momentum with an optional record of the pair it was merged from.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoJet {
    px: f64,
    py: f64,
    pz: f64,
    e: f64,
    history: Option<Box<(PseudoJet, PseudoJet)>>,
}

impl PseudoJet {
    pub fn new(px: f64, py: f64, pz: f64, e: f64) -> Self {
        PseudoJet { px, py, pz, e, history: None }
    }

    pub fn from_array(p: [f64; 4]) -> Self {
        PseudoJet::new(p[0], p[1], p[2], p[3])
    }

    /// E-scheme recombination; the result remembers both inputs.
    pub fn merge(a: PseudoJet, b: PseudoJet) -> Self {
        PseudoJet {
            px: a.px + b.px,
            py: a.py + b.py,
            pz: a.pz + b.pz,
            e: a.e + b.e,
            history: Some(Box::new((a, b))),
        }
    }

    pub fn px(&self) -> f64 {
        self.px
    }

    pub fn py(&self) -> f64 {
        self.py
    }

    pub fn pz(&self) -> f64 {
        self.pz
    }

    pub fn e(&self) -> f64 {
        self.e
    }

    pub fn momentum(&self) -> [f64; 4] {
        [self.px, self.py, self.pz, self.e]
    }

    pub fn pt2(&self) -> f64 {
        self.px * self.px + self.py * self.py
    }

    pub fn pt(&self) -> f64 {
        self.px.hypot(self.py)
    }

    pub fn p(&self) -> f64 {
        (self.pt2() + self.pz * self.pz).sqrt()
    }

    /// Azimuth in `(−π, π]`.
    pub fn phi(&self) -> f64 {
        let phi = self.py.atan2(self.px);
        if phi <= -PI {
            phi + 2.0 * PI
        } else {
            phi
        }
    }

    pub fn rapidity(&self) -> f64 {
        if self.e <= self.pz.abs() {
            return MAX_RAPIDITY.copysign(self.pz);
        }
        0.5 * ((self.e + self.pz) / (self.e - self.pz)).ln()
    }

    pub fn eta(&self) -> f64 {
        let pt = self.pt();
        if pt == 0.0 {
            return MAX_RAPIDITY.copysign(self.pz);
        }
        (self.pz / pt).asinh()
    }

    pub fn is_finite(&self) -> bool {
        self.momentum().iter().all(|x| x.is_finite())
    }

    pub fn parents(&self) -> Option<(&PseudoJet, &PseudoJet)> {
        self.history.as_deref().map(|(a, b)| (a, b))
    }

    /// Number of original constituents under this jet.
    pub fn n_leaves(&self) -> usize {
        match self.parents() {
            Some((a, b)) => a.n_leaves() + b.n_leaves(),
            None => 1,
        }
    }

    /// The original constituents, left to right through the history.
    pub fn leaves(&self) -> Vec<&PseudoJet> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(j) = stack.pop() {
            match j.parents() {
                Some((a, b)) => {
                    stack.push(b);
                    stack.push(a);
                }
                None => out.push(j),
            }
        }
        out
    }

    /// `ΔR²` in rapidity and azimuth.
    pub fn delta_r2(&self, other: &PseudoJet) -> f64 {
        let dy = self.rapidity() - other.rapidity();
        let mut dphi = (self.phi() - other.phi()).abs();
        if dphi > PI {
            dphi = 2.0 * PI - dphi;
        }
        dy * dy + dphi * dphi
    }
}

/// Distance measure of the sequential recombination.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    AntiKt,
    CamAachen,
}

impl Algorithm {
    /// Exponent `p` of `pT^{2p}`.
    pub fn exponent(self) -> i32 {
        match self {
            Algorithm::AntiKt => -1,
            Algorithm::CamAachen => 0,
        }
    }

    fn pt_weight(self, j: &PseudoJet) -> f64 {
        match self {
            Algorithm::AntiKt => 1.0 / j.pt2(),
            Algorithm::CamAachen => 1.0,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Algorithm::AntiKt => "anti-kt",
            Algorithm::CamAachen => "cambridge-aachen",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_', '/'], "").as_str() {
            "antikt" => Ok(Algorithm::AntiKt),
            "ca" | "cambridgeaachen" | "camaachen" => Ok(Algorithm::CamAachen),
            _ => Err(Error::ParameterDomain(format!("unknown clustering algorithm '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClusterSpec {
    pub algorithm: Algorithm,
    pub radius: f64,
}

impl ClusterSpec {
    pub fn new(algorithm: Algorithm, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= 2.0) {
            return Err(Error::OutOfRange { value: radius, range: "(0, 2]" });
        }
        Ok(ClusterSpec { algorithm, radius })
    }

    pub fn anti_kt(radius: f64) -> Result<Self> {
        Self::new(Algorithm::AntiKt, radius)
    }

    pub fn cam_aachen(radius: f64) -> Result<Self> {
        Self::new(Algorithm::CamAachen, radius)
    }
}

/// Candidate recombination step: a pair distance, or a beam distance with
/// `b == usize::MAX`. Ordered by distance, then by index pair.
#[derive(Clone, Copy, Debug)]
struct Step {
    d: f64,
    a: usize,
    b: usize,
}

impl Step {
    fn pair(d: f64, i: usize, j: usize) -> Self {
        Step { d, a: i.min(j), b: i.max(j) }
    }

    fn beam(d: f64, i: usize) -> Self {
        Step { d, a: i, b: usize::MAX }
    }

    fn cmp(&self, other: &Step) -> Ordering {
        self.d.total_cmp(&other.d).then(self.a.cmp(&other.a)).then(self.b.cmp(&other.b))
    }

    fn min(self, other: Step) -> Step {
        if other.cmp(&self) == Ordering::Less {
            other
        } else {
            self
        }
    }
}

struct Clustering {
    alg: Algorithm,
    inv_r2: f64,
    jets: Vec<Option<PseudoJet>>,
    weight: Vec<f64>,
    nearest: Vec<Option<Step>>,
}

impl Clustering {
    fn pair_distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.jets[i].as_ref().unwrap(), self.jets[j].as_ref().unwrap());
        self.weight[i].min(self.weight[j]) * a.delta_r2(b) * self.inv_r2
    }

    fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.jets.len()).filter(|&i| self.jets[i].is_some())
    }

    fn nearest_of(&self, i: usize) -> Option<Step> {
        self.active()
            .filter(|&j| j != i)
            .map(|j| Step::pair(self.pair_distance(i, j), i, j))
            .reduce(Step::min)
    }

    fn push(&mut self, j: PseudoJet) -> usize {
        self.weight.push(self.alg.pt_weight(&j));
        self.jets.push(Some(j));
        self.nearest.push(None);
        self.jets.len() - 1
    }
}

fn check_input(constituents: &[PseudoJet]) -> Result<()> {
    if constituents.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(i) = constituents.iter().position(|c| !c.is_finite()) {
        return Err(Error::NonFiniteMomentum(i));
    }
    Ok(())
}

/// Generalized-kT clustering into inclusive jets, hardest first.
///
/// Inputs take indices in list order and merged jets are appended after
/// them. Equal distances are resolved by the lowest index pair, a beam step
/// for jet `i` ranking after every pair step `(i, j)` at the same distance.
fn run_clustering(constituents: &[PseudoJet], alg: Algorithm, radius: f64) -> Result<Vec<PseudoJet>> {
    check_input(constituents)?;
    let mut c = Clustering {
        alg,
        inv_r2: 1.0 / (radius * radius),
        jets: Vec::new(),
        weight: Vec::new(),
        nearest: Vec::new(),
    };
    for j in constituents {
        c.push(PseudoJet::new(j.px, j.py, j.pz, j.e));
    }
    for i in 0..c.jets.len() {
        c.nearest[i] = c.nearest_of(i);
    }
    let mut finished = Vec::new();
    let mut remaining = constituents.len();
    while remaining > 0 {
        let step = c
            .active()
            .flat_map(|i| c.nearest[i].into_iter().chain([Step::beam(c.weight[i], i)]))
            .reduce(Step::min)
            .expect("an active jet remains");
        if step.b == usize::MAX {
            finished.push(c.jets[step.a].take().unwrap());
            remaining -= 1;
            for m in c.active().collect::<Vec<_>>() {
                if c.nearest[m].is_some_and(|s| s.a == step.a || s.b == step.a) {
                    c.nearest[m] = c.nearest_of(m);
                }
            }
            continue;
        }
        let a = c.jets[step.a].take().unwrap();
        let b = c.jets[step.b].take().unwrap();
        let k = c.push(PseudoJet::merge(a, b));
        remaining -= 1;
        for m in c.active().collect::<Vec<_>>() {
            if m == k {
                continue;
            }
            let stale = c.nearest[m].is_some_and(|s| [step.a, step.b].contains(&s.a) || [step.a, step.b].contains(&s.b));
            if stale {
                c.nearest[m] = c.nearest_of(m);
            } else {
                let cand = Step::pair(c.pair_distance(m, k), m, k);
                c.nearest[m] = Some(c.nearest[m].map_or(cand, |s| s.min(cand)));
            }
        }
        c.nearest[k] = c.nearest_of(k);
    }
    finished.sort_by(|x, y| y.pt2().total_cmp(&x.pt2()));
    Ok(finished)
}

/// Inclusive jets with `d_ij = min(pT_i^{2p}, pT_j^{2p})·ΔR²/R²` and
/// `d_iB = pT_i^{2p}`, sorted by descending pT. Each jet carries its full
/// clustering history.
pub fn cluster(constituents: &[PseudoJet], spec: &ClusterSpec) -> Result<Vec<PseudoJet>> {
    run_clustering(constituents, spec.algorithm, spec.radius)
}

/// Clusters with `spec` and then keeps merging the resulting inclusive jets
/// with the same pair distance until a single tree remains.
pub fn cluster_to_tree(constituents: &[PseudoJet], spec: &ClusterSpec) -> Result<PseudoJet> {
    let inclusive = cluster(constituents, spec)?;
    let mut c = Clustering {
        alg: spec.algorithm,
        inv_r2: 1.0 / (spec.radius * spec.radius),
        jets: Vec::new(),
        weight: Vec::new(),
        nearest: Vec::new(),
    };
    for j in inclusive {
        c.push(j);
    }
    while let Some(step) = c.active().filter_map(|i| c.nearest_of(i)).reduce(Step::min) {
        let a = c.jets[step.a].take().unwrap();
        let b = c.jets[step.b].take().unwrap();
        c.push(PseudoJet::merge(a, b));
    }
    let last = c.active().next().expect("at least one inclusive jet");
    Ok(c.jets[last].take().unwrap())
}

/// Undoes clustering steps, always splitting the hardest prong that has
/// parents, until `n_prongs` prongs exist. Returns them hardest first.
pub fn decluster(jet: &PseudoJet, n_prongs: usize) -> Result<Vec<PseudoJet>> {
    if n_prongs < 2 {
        return Err(Error::ParameterDomain(format!("n_prongs = {n_prongs} must be at least 2")));
    }
    let leaves = jet.n_leaves();
    if leaves < n_prongs {
        return Err(Error::InsufficientConstituents { leaves, requested: n_prongs });
    }
    let mut prongs = vec![jet.clone()];
    while prongs.len() < n_prongs {
        let idx = (0..prongs.len())
            .filter(|&i| prongs[i].parents().is_some())
            .max_by(|&i, &j| prongs[i].pt2().total_cmp(&prongs[j].pt2()).then(j.cmp(&i)))
            .expect("enough leaves guarantee a splittable prong");
        let split = prongs.remove(idx);
        let (a, b) = *split.history.expect("checked above");
        prongs.push(a);
        prongs.push(b);
    }
    prongs.sort_by(|x, y| y.pt2().total_cmp(&x.pt2()));
    Ok(prongs)
}

/// How prong momenta are turned into fractions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FractionMode {
    /// `pT_i / pT_jet` for every prong.
    PerJetPt,
    /// Softer prong's share of the two-prong pT sum.
    PairMin,
    /// Harder prong's share of the two-prong pT sum.
    PairMax,
}

impl FromStr for FractionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "perjetpt" | "jet" => Ok(FractionMode::PerJetPt),
            "pairmin" | "min" => Ok(FractionMode::PairMin),
            "pairmax" | "max" => Ok(FractionMode::PairMax),
            _ => Err(Error::ParameterDomain(format!("unknown fraction mode '{s}'"))),
        }
    }
}

/// Momentum fractions of `prongs`, in the order given.
///
/// For [`FractionMode::PerJetPt`] the fractions of a full declustering sum
/// to at least one: prong pTs add as vectors, so their magnitudes can only
/// exceed the jet pT.
pub fn momentum_fractions(prongs: &[PseudoJet], jet: &PseudoJet, mode: FractionMode) -> Result<Vec<f64>> {
    if prongs.is_empty() {
        return Err(Error::EmptyInput);
    }
    match mode {
        FractionMode::PerJetPt => {
            let pt = jet.pt();
            if pt == 0.0 {
                return Err(Error::ZeroJetPt);
            }
            Ok(prongs.iter().map(|p| p.pt() / pt).collect())
        }
        FractionMode::PairMin | FractionMode::PairMax => {
            if prongs.len() != 2 {
                return Err(Error::PairModeArity(prongs.len()));
            }
            let (a, b) = (prongs[0].pt(), prongs[1].pt());
            if a + b == 0.0 {
                return Err(Error::ZeroJetPt);
            }
            let pick = if mode == FractionMode::PairMin { a.min(b) } else { a.max(b) };
            Ok(vec![pick / (a + b)])
        }
    }
}

/// Kinematic cuts. A zero threshold disables that cut.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectionCuts {
    pub jet_pt_min: f64,
    pub abs_eta_max: f64,
    pub constituent_pt_min: f64,
}

impl Default for SelectionCuts {
    fn default() -> Self {
        SelectionCuts { jet_pt_min: 300.0, abs_eta_max: 2.4, constituent_pt_min: 1.0 }
    }
}

impl SelectionCuts {
    pub fn new(jet_pt_min: f64, abs_eta_max: f64, constituent_pt_min: f64) -> Result<Self> {
        for v in [jet_pt_min, abs_eta_max, constituent_pt_min] {
            if !(v >= 0.0) {
                return Err(Error::OutOfRange { value: v, range: "[0, inf)" });
            }
        }
        Ok(SelectionCuts { jet_pt_min, abs_eta_max, constituent_pt_min })
    }

    /// No cuts at all.
    pub fn none() -> Self {
        SelectionCuts { jet_pt_min: 0.0, abs_eta_max: 0.0, constituent_pt_min: 0.0 }
    }

    pub fn accepts_jet(&self, j: &PseudoJet) -> bool {
        (self.jet_pt_min == 0.0 || j.pt() > self.jet_pt_min)
            && (self.abs_eta_max == 0.0 || j.eta().abs() < self.abs_eta_max)
    }

    pub fn accepts_constituent(&self, c: &PseudoJet) -> bool {
        self.constituent_pt_min == 0.0 || c.pt() > self.constituent_pt_min
    }
}

/// Jets passing the jet-level cuts.
pub fn select(jets: &[PseudoJet], cuts: &SelectionCuts) -> Vec<PseudoJet> {
    jets.iter().filter(|j| cuts.accepts_jet(j)).cloned().collect()
}

/// Constituents passing the constituent-level cut.
pub fn filter_constituents<'a>(constituents: impl IntoIterator<Item = &'a PseudoJet>, cuts: &SelectionCuts) -> Vec<PseudoJet> {
    constituents
        .into_iter()
        .filter(|c| cuts.accepts_constituent(c))
        .map(|c| PseudoJet::new(c.px, c.py, c.pz, c.e))
        .collect()
}

/// Settings of the event-level prong-fraction recipe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProngRecipe {
    pub jet_spec: ClusterSpec,
    pub subjet_spec: ClusterSpec,
    pub cuts: SelectionCuts,
    pub n_prongs: usize,
    pub mode: FractionMode,
}

impl Default for ProngRecipe {
    fn default() -> Self {
        ProngRecipe {
            jet_spec: ClusterSpec { algorithm: Algorithm::AntiKt, radius: 0.8 },
            subjet_spec: ClusterSpec { algorithm: Algorithm::CamAachen, radius: 0.4 },
            cuts: SelectionCuts::default(),
            n_prongs: 2,
            mode: FractionMode::PairMax,
        }
    }
}

/// Why an event produced no fractions.
#[derive(Clone, Debug, PartialEq)]
pub enum EventSkip {
    Empty,
    NoSelectedJet,
    TooFewConstituents { leaves: usize },
}

/// Runs the recipe on one event: anti-kT jets, jet selection, constituent
/// cut on the hardest selected jet, C/A reclustering into a single tree,
/// declustering and fractions. Fractions come hardest prong first.
pub fn event_prong_fractions(constituents: &[PseudoJet], recipe: &ProngRecipe) -> Result<std::result::Result<Vec<f64>, EventSkip>> {
    if constituents.is_empty() {
        return Ok(Err(EventSkip::Empty));
    }
    let jets = cluster(constituents, &recipe.jet_spec)?;
    let Some(jet) = select(&jets, &recipe.cuts).into_iter().next() else {
        return Ok(Err(EventSkip::NoSelectedJet));
    };
    let kept = filter_constituents(jet.leaves(), &recipe.cuts);
    if kept.len() < recipe.n_prongs {
        return Ok(Err(EventSkip::TooFewConstituents { leaves: kept.len() }));
    }
    let tree = cluster_to_tree(&kept, &recipe.subjet_spec)?;
    let prongs = decluster(&tree, recipe.n_prongs)?;
    Ok(Ok(momentum_fractions(&prongs, &tree, recipe.mode)?))
}
