//! One-dimensional substitution tilings: exact tile lengths and frequencies
//! in the dilation field, supertile and microtile geometry (return vectors
//! and microtile vectors), the transversal/longitudinal/tensor triples, and
//! the Laplacian eigenvalues of the Dirichlet forms with their numerical
//! cross-checks.
//!
//! Conventions: punctures sit at the left endpoint of each (half-open) tile;
//! the microtile point fixed by a choice-function continuation is the limit
//! of the nested left-anchored microtiles. Level `n` of a geometric edge
//! family refers to the length of the common path prefix, so that return
//! vectors scale as `theta^n` and microtile vectors as `theta^{-n}` exactly.

use std::sync::Arc;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{ObservableFn, SampledFn};
use crate::graph::{
    canonical_tau, maximal_horizontal, BratteliGraph, Edge, EdgeId, GraphError, HorizontalPair,
    Orientation,
};
use crate::matrix::IntMatrix;
use crate::numberfield::{
    pf_minimal_poly, pisot_analyze, star_values, FieldElement, FieldError, NumberField, PisotData,
};
use crate::numeric::KahanSum;
use crate::spectral::state::{nonresonant_phase_check, tensor_leading_mean, ResonanceCheck};
use crate::spectral::{Spectra, SpectralError};
use crate::special::real_gamma;

#[derive(Debug, Error)]
pub enum TilingError {
    #[error("substitution matrix is not primitive")]
    NonPrimitive,
    #[error("no letter starts its own substitution word; replace the rules by a power")]
    NoFixedPoint,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("dilation factor is not an irrational Pisot number")]
    NotPisot,
    #[error("supertile enumeration too large ({0} offsets)")]
    TooLarge(u64),
    #[error("parameter mismatch: expected {expected}, got {got} for {what}")]
    ParameterMismatch {
        what: &'static str,
        expected: f64,
        got: f64,
    },
    #[error("choice-function paths failed to meet (edge pair {0}, {1})")]
    NoMeeting(String, String),
    #[error("unknown id in substitution rules: {0}")]
    UnknownId(String),
}

/// Substitution rules as read from a rules file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubstitutionRules {
    pub alphabet: Vec<String>,
    pub rules: Vec<(String, Vec<String>)>,
    /// optional explicit transversal pairs (edge base names, "+"/"-")
    #[serde(default)]
    pub h_tr: Option<Vec<(String, String, String)>>,
    /// optional explicit longitudinal pairs
    #[serde(default)]
    pub h_lg: Option<Vec<(String, String, String)>>,
}

/// A primitive 1-D substitution with exact geometry over its dilation field.
pub struct Substitution1D {
    pub alphabet: Vec<String>,
    /// substitution words as letter indices
    pub rules: Vec<Vec<usize>>,
    pub matrix: IntMatrix,
    pub field: Arc<NumberField>,
    /// the dilation factor as a field element
    pub theta: FieldElement,
    /// exact tile lengths `L_v`, normalized so `sum R_v L_v = 1`
    pub lengths: Vec<FieldElement>,
    /// exact tile frequencies `R_v`, normalized so `sum R_v = 1`
    pub freqs: Vec<FieldElement>,
    /// substitution graph (edge `u -> v` per occurrence of `u` in `sigma(v)`)
    pub graph: BratteliGraph,
    /// reversed graph with its own choice function and horizontal set
    pub reversed: BratteliGraph,
    /// per edge: (letter, tile, position in the substitution word)
    pub occurrences: Vec<(usize, usize, usize)>,
    /// per edge: left-endpoint offset of the occurrence inside the stretched
    /// substitution word (level-0 length units)
    pub off_sigma: Vec<FieldElement>,
}

impl Substitution1D {
    pub fn build(rules: &SubstitutionRules) -> Result<Self, TilingError> {
        let alphabet = rules.alphabet.clone();
        let n = alphabet.len();
        let letter_index = |name: &str| -> Result<usize, TilingError> {
            alphabet
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| TilingError::UnknownId(name.to_string()))
        };
        let mut words = vec![Vec::new(); n];
        for (letter, word) in &rules.rules {
            let v = letter_index(letter)?;
            words[v] = word
                .iter()
                .map(|u| letter_index(u))
                .collect::<Result<Vec<_>, _>>()?;
        }
        if words.iter().any(|w| w.is_empty()) {
            return Err(TilingError::UnknownId("missing substitution rule".into()));
        }

        let mut matrix = IntMatrix::zero(n);
        for (v, word) in words.iter().enumerate() {
            for &u in word {
                matrix.set(u, v, matrix.get(u, v) + 1);
            }
        }
        if !matrix.primitivity().primitive {
            return Err(TilingError::NonPrimitive);
        }

        let field = NumberField::new(pf_minimal_poly(&matrix, 1)?)?;
        let theta = FieldElement::theta(&field);

        // exact Perron data over the field
        let freqs_raw = field_kernel(&field, &matrix, false);
        let lengths_raw = field_kernel(&field, &matrix, true);
        let mut sum_r = FieldElement::zero(&field);
        for r in &freqs_raw {
            sum_r = sum_r.add(r);
        }
        let inv_sum = sum_r.inverse()?;
        let freqs: Vec<FieldElement> = freqs_raw.iter().map(|r| r.mul(&inv_sum)).collect();
        let mut rl = FieldElement::zero(&field);
        for (r, l) in freqs.iter().zip(&lengths_raw) {
            rl = rl.add(&r.mul(l));
        }
        let inv_rl = rl.inverse()?;
        let lengths: Vec<FieldElement> = lengths_raw.iter().map(|l| l.mul(&inv_rl)).collect();
        // positivity of the embeddings (the kernel solver fixes signs only
        // up to an overall factor, which the normalizations make positive)
        debug_assert!(freqs.iter().all(|r| r.to_real() > 0.0));
        debug_assert!(lengths.iter().all(|l| l.to_real() > 0.0));
        // self-similarity: theta L_v = sum of the lengths in sigma(t_v)
        for (v, word) in words.iter().enumerate() {
            let mut total = FieldElement::zero(&field);
            for &u in word {
                total = total.add(&lengths[u]);
            }
            assert!(
                total.sub(&theta.mul(&lengths[v])).is_zero(),
                "length self-similarity must hold exactly"
            );
        }

        // substitution graph edges, one per occurrence
        let mut edges = Vec::new();
        let mut occurrences = Vec::new();
        let mut off_sigma = Vec::new();
        for (v, word) in words.iter().enumerate() {
            let mut offset = FieldElement::zero(&field);
            for (pos, &u) in word.iter().enumerate() {
                edges.push(Edge {
                    name: format!("{}.{}.{}", alphabet[u], alphabet[v], pos),
                    source: u,
                    range: v,
                });
                occurrences.push((u, v, pos));
                off_sigma.push(offset.clone());
                offset = offset.add(&lengths[u]);
            }
        }

        // star loop: the first letter whose word starts with itself
        let star_edge = occurrences
            .iter()
            .position(|&(u, v, pos)| u == v && pos == 0)
            .ok_or(TilingError::NoFixedPoint)?;

        let tau = canonical_tau(n, &edges, star_edge).ok_or(TilingError::NoFixedPoint)?;
        let h_tr = match &rules.h_tr {
            None => maximal_horizontal(&edges),
            Some(pairs) => parse_pairs(&edges, pairs, "")?,
        };
        let graph = BratteliGraph::new(alphabet.clone(), edges, star_edge, tau, h_tr, 0.5)?;

        let reversed = match &rules.h_lg {
            None => graph.reverse_with_defaults(0.5)?,
            Some(pairs) => {
                let base = graph.reverse_with_defaults(0.5)?;
                let h_lg = parse_pairs(&base.edges, pairs, "~")?;
                graph.reverse(base.tau.clone(), h_lg, 0.5)?
            }
        };

        Ok(Substitution1D {
            alphabet,
            rules: words,
            matrix,
            field,
            theta,
            lengths,
            freqs,
            graph,
            reversed,
            occurrences,
            off_sigma,
        })
    }

    pub fn theta_value(&self) -> f64 {
        self.field.theta()
    }

    pub fn tile_length(&self, v: usize) -> f64 {
        self.lengths[v].to_real()
    }

    pub fn tile_freq(&self, v: usize) -> f64 {
        self.freqs[v].to_real()
    }

    /// Transversal graph with the requested scale parameter.
    pub fn transversal_graph(&self, rho: f64) -> Result<BratteliGraph, TilingError> {
        Ok(BratteliGraph::new(
            self.graph.vertices.clone(),
            self.graph.edges.clone(),
            self.graph.star_edge,
            self.graph.tau.clone(),
            self.graph.horizontal.clone(),
            rho,
        )?)
    }

    /// Longitudinal (reversed) graph with the requested scale parameter.
    pub fn longitudinal_graph(&self, rho: f64) -> Result<BratteliGraph, TilingError> {
        Ok(BratteliGraph::new(
            self.reversed.vertices.clone(),
            self.reversed.edges.clone(),
            self.reversed.star_edge,
            self.reversed.tau.clone(),
            self.reversed.horizontal.clone(),
            rho,
        )?)
    }

    /// Left-endpoint offsets of all level-0 tiles inside the `n`-th
    /// substitution word of `letter`, exact in the dilation field.
    pub fn supertile_offsets(
        &self,
        letter: usize,
        n: usize,
    ) -> Result<Vec<(usize, FieldElement)>, TilingError> {
        let counts = self.matrix.pow(n);
        let total: f64 = (0..self.alphabet.len())
            .map(|u| counts.get(u, letter).to_f64().unwrap_or(f64::INFINITY))
            .sum();
        if n > 30 || total > 1e6 {
            return Err(TilingError::TooLarge(total as u64));
        }
        let mut out = Vec::with_capacity(total as usize);
        self.offsets_recursive(letter, n, &FieldElement::zero(&self.field), &mut out);
        Ok(out)
    }

    fn offsets_recursive(
        &self,
        letter: usize,
        n: usize,
        base: &FieldElement,
        out: &mut Vec<(usize, FieldElement)>,
    ) {
        if n == 0 {
            out.push((letter, base.clone()));
            return;
        }
        // theta^{n-1}-stretched copies of the level-(n-1) supertiles of the
        // letters of sigma(letter), laid end to end
        let mut theta_pow = FieldElement::one(&self.field);
        for _ in 0..n - 1 {
            theta_pow = theta_pow.mul(&self.theta);
        }
        let mut offset = FieldElement::zero(&self.field);
        for &u in &self.rules[letter] {
            let shifted = base.add(&theta_pow.mul(&offset));
            self.offsets_recursive(u, n - 1, &shifted, out);
            offset = offset.add(&self.lengths[u]);
        }
    }

    /// Choice-function limit point inside the microtile of a reversed edge,
    /// in the frame of that microtile's prototile.
    fn tail_point(&self, edge: EdgeId) -> FieldElement {
        let theta_inv = self.theta.inverse().expect("theta != 0");
        let star = self.reversed.star_edge;
        let mut path = Vec::new();
        let mut cur = edge;
        for _ in 0..self.alphabet.len() + 2 {
            cur = self.reversed.tau[cur];
            path.push(cur);
            if cur == star {
                break;
            }
        }
        assert_eq!(*path.last().unwrap(), star, "choice function reaches the star loop");
        let off_dec = |e: EdgeId| self.off_sigma[e].mul(&theta_inv);
        let mut acc = FieldElement::zero(&self.field);
        let mut scale = FieldElement::one(&self.field);
        for (k, &e) in path.iter().enumerate() {
            if e == star {
                // geometric tail: off*(theta^{-k}) / (1 - theta^{-1})
                let denom = FieldElement::one(&self.field).sub(&theta_inv);
                let tail = off_dec(star).mul(&scale).mul(&denom.inverse().expect("theta > 1"));
                acc = acc.add(&tail);
                break;
            }
            let _ = k;
            acc = acc.add(&scale.mul(&off_dec(e)));
            scale = scale.mul(&theta_inv);
        }
        acc
    }

    /// Puncture of the microtile of a reversed edge within its tile frame.
    pub fn microtile_point(&self, edge: EdgeId) -> FieldElement {
        let theta_inv = self.theta.inverse().expect("theta != 0");
        self.off_sigma[edge]
            .mul(&theta_inv)
            .add(&theta_inv.mul(&self.tail_point(edge)))
    }

    /// Exact point in tile `v` addressed by a reversed path from `v`
    /// continued by the choice function.
    pub fn point_of_reversed_path(&self, path: &[EdgeId]) -> FieldElement {
        assert!(!path.is_empty());
        let theta_inv = self.theta.inverse().expect("theta != 0");
        let mut acc = FieldElement::zero(&self.field);
        let mut scale = FieldElement::one(&self.field);
        for &e in path {
            acc = acc.add(&scale.mul(&self.off_sigma[e].mul(&theta_inv)));
            scale = scale.mul(&theta_inv);
        }
        let last = *path.last().unwrap();
        acc.add(&scale.mul(&self.tail_point(last)))
    }
}

fn parse_pairs(
    edges: &[Edge],
    pairs: &[(String, String, String)],
    suffix: &str,
) -> Result<Vec<HorizontalPair>, TilingError> {
    let mut out = Vec::new();
    for (from, to, sign) in pairs {
        let fname = format!("{from}{suffix}");
        let tname = format!("{to}{suffix}");
        let f = edges
            .iter()
            .position(|e| e.name == fname)
            .ok_or_else(|| TilingError::UnknownId(from.clone()))?;
        let t = edges
            .iter()
            .position(|e| e.name == tname)
            .ok_or_else(|| TilingError::UnknownId(to.clone()))?;
        let orientation = match sign.as_str() {
            "+" => Orientation::Positive,
            _ => Orientation::Negative,
        };
        out.push(HorizontalPair {
            from: f,
            to: t,
            orientation,
        });
    }
    Ok(out)
}

/// Exact kernel vector of `(A - theta I)` (or its transpose) over the field.
fn field_kernel(field: &Arc<NumberField>, a: &IntMatrix, transpose: bool) -> Vec<FieldElement> {
    let n = a.dim();
    let theta = FieldElement::theta(field);
    let mut m: Vec<Vec<FieldElement>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let entry = if transpose { a.get(j, i) } else { a.get(i, j) };
                    let mut x = FieldElement::from_integer(field, entry);
                    if i == j {
                        x = x.sub(&theta);
                    }
                    x
                })
                .collect()
        })
        .collect();

    let mut pivot_cols = Vec::new();
    let mut row = 0usize;
    for col in 0..n {
        let pivot_row = (row..n).find(|&r| !m[r][col].is_zero());
        let Some(pr) = pivot_row else { continue };
        m.swap(row, pr);
        let inv = m[row][col].inverse().expect("nonzero pivot");
        for c in 0..n {
            m[row][c] = m[row][c].mul(&inv);
        }
        for r in 0..n {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in 0..n {
                    let sub = factor.mul(&m[row][c]);
                    m[r][c] = m[r][c].sub(&sub);
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
    }
    let free = (0..n)
        .find(|c| !pivot_cols.contains(c))
        .expect("theta is an eigenvalue, so the kernel is nontrivial");
    let mut v = vec![FieldElement::zero(field); n];
    v[free] = FieldElement::one(field);
    for (r, &pc) in pivot_cols.iter().enumerate() {
        v[pc] = m[r][free].neg();
    }
    // normalize sign so the real embedding is positive
    if v.iter().map(|x| x.to_real()).sum::<f64>() < 0.0 {
        for x in &mut v {
            *x = x.neg();
        }
    }
    v
}

// ---------------------------------------------------------------------------
// horizontal geometry: return vectors and microtile vectors

#[derive(Debug, Clone)]
pub struct ReturnVector {
    /// index into the transversal horizontal set
    pub pair: usize,
    /// depth at which the two choice-function continuations merge
    pub meeting_depth: usize,
    /// exact translation between the two tiles inside the common supertile
    pub vector: FieldElement,
}

#[derive(Debug, Clone)]
pub struct MicrotileVector {
    /// index into the longitudinal horizontal set
    pub pair: usize,
    /// exact translation between the two microtile punctures
    pub vector: FieldElement,
}

/// Geometric data of the horizontal sets: return vectors, microtile vectors,
/// and the normalization constants of the two Dirichlet forms.
pub struct HorizontalGeometry {
    pub returns: Vec<ReturnVector>,
    pub microtiles: Vec<MicrotileVector>,
    /// `c_tr = (sum_h L_{s2(h)})^{-1}`, exact
    pub c_tr: FieldElement,
    /// `c_lg = (sum_h R_{s2(h)})^{-1}`, exact
    pub c_lg: FieldElement,
    /// the (scalar, d = 1) tensor `sum_h freq(t_{s2(h)}) a_h^2`
    pub k_scalar: FieldElement,
}

/// Translation vectors for every transversal pair: follow both
/// choice-function continuations until they merge and accumulate the offset
/// differences, scaled by the supertile level.
pub fn return_vectors(sub: &Substitution1D) -> Result<Vec<ReturnVector>, TilingError> {
    let g = &sub.graph;
    let mut out = Vec::new();
    for (idx, h) in g.horizontal.iter().enumerate() {
        let mut x = h.from;
        let mut y = h.to;
        let mut vector = FieldElement::zero(&sub.field);
        let mut theta_pow = FieldElement::one(&sub.field);
        let mut meeting_depth = 0usize;
        let mut met = false;
        for depth in 1..=(sub.alphabet.len() + 3) {
            if x == y {
                met = true;
                break;
            }
            let diff = sub.off_sigma[y].sub(&sub.off_sigma[x]);
            vector = vector.add(&theta_pow.mul(&diff));
            meeting_depth = depth;
            theta_pow = theta_pow.mul(&sub.theta);
            x = g.tau[x];
            y = g.tau[y];
        }
        if !met && x != y {
            return Err(TilingError::NoMeeting(
                g.edges[h.from].name.clone(),
                g.edges[h.to].name.clone(),
            ));
        }
        out.push(ReturnVector {
            pair: idx,
            meeting_depth,
            vector,
        });
    }
    Ok(out)
}

/// Microtile translation vectors for every longitudinal pair.
pub fn microtile_vectors(sub: &Substitution1D) -> Vec<MicrotileVector> {
    sub.reversed
        .horizontal
        .iter()
        .enumerate()
        .map(|(idx, h)| MicrotileVector {
            pair: idx,
            vector: sub.microtile_point(h.to).sub(&sub.microtile_point(h.from)),
        })
        .collect()
}

pub fn horizontal_geometry(sub: &Substitution1D) -> Result<HorizontalGeometry, TilingError> {
    let returns = return_vectors(sub)?;
    let microtiles = microtile_vectors(sub);
    let mut sum_l = FieldElement::zero(&sub.field);
    for h in &sub.graph.horizontal {
        let v = sub.graph.edges[h.from].source;
        sum_l = sum_l.add(&sub.lengths[v]);
    }
    let mut sum_r = FieldElement::zero(&sub.field);
    let mut k_scalar = FieldElement::zero(&sub.field);
    for (h, mv) in sub.reversed.horizontal.iter().zip(&microtiles) {
        let v = sub.reversed.edges[h.from].source;
        sum_r = sum_r.add(&sub.freqs[v]);
        k_scalar = k_scalar.add(&sub.freqs[v].mul(&mv.vector).mul(&mv.vector));
    }
    Ok(HorizontalGeometry {
        returns,
        microtiles,
        c_tr: sum_l.inverse()?,
        c_lg: sum_r.inverse()?,
        k_scalar,
    })
}

// ---------------------------------------------------------------------------
// Dirichlet parameters and Laplacian eigenvalues

#[derive(Debug, Clone)]
pub struct DirichletParams {
    pub rho_tr: f64,
    pub rho_lg: f64,
    pub pisot: PisotData,
    /// non-resonance scans for every pair of subleading phases
    pub resonance: Vec<((usize, usize), ResonanceCheck)>,
    /// true when there is a single subleading conjugate, so the phase
    /// condition holds vacuously
    pub vacuous: bool,
}

/// The scale parameters forced by the Dirichlet forms: `rho_tr = |theta_2|`,
/// `rho_lg = 1/theta`, with the phase non-resonance certificate.
pub fn dirichlet_parameters(sub: &Substitution1D, k_max: i64) -> Result<DirichletParams, TilingError> {
    let pd = pisot_analyze(&sub.field);
    if !pd.pisot {
        return Err(TilingError::NotPisot);
    }
    let rho_tr = pd.conjugates[0].norm();
    let rho_lg = 1.0 / pd.theta;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut resonance = Vec::new();
    let l = pd.phases.len();
    for i in 0..l {
        for j in 0..l {
            if i == j {
                continue;
            }
            let mut phi = pd.phases[i] - pd.phases[j];
            while phi <= 0.0 {
                phi += two_pi;
            }
            while phi >= two_pi {
                phi -= two_pi;
            }
            resonance.push((
                (i + 2, j + 2),
                nonresonant_phase_check(phi, rho_tr, rho_lg, k_max),
            ));
        }
    }
    Ok(DirichletParams {
        rho_tr,
        rho_lg,
        pisot: pd,
        vacuous: resonance.is_empty(),
        resonance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormSide {
    Transversal,
    Longitudinal,
}

/// Dirichlet-form Laplacian eigenvalue of the frequency `beta`:
/// longitudinal `-c_lg (2 pi)^2 sum_h freq(t_{s2(h)}) beta(a_h)^2`,
/// transversal `-c_tr (2 pi)^2 sum_h freq(t_{s2(h)}) |star(beta * r_h)|^2`
/// with the reduced star map over the subleading conjugates.
pub fn laplacian_eigenvalue(
    sub: &Substitution1D,
    geo: &HorizontalGeometry,
    beta: &FieldElement,
    side: FormSide,
) -> Result<f64, TilingError> {
    let four_pi_sq = (2.0 * std::f64::consts::PI).powi(2);
    match side {
        FormSide::Longitudinal => {
            let mut acc = KahanSum::new();
            for (h, mv) in sub.reversed.horizontal.iter().zip(&geo.microtiles) {
                let v = sub.reversed.edges[h.from].source;
                let value = beta.mul(&mv.vector).to_real();
                acc.add(sub.tile_freq(v) * value * value);
            }
            Ok(-geo.c_lg.to_real() * four_pi_sq * acc.value())
        }
        FormSide::Transversal => {
            let pd = pisot_analyze(&sub.field);
            if !pd.pisot {
                return Err(TilingError::NotPisot);
            }
            let mut acc = KahanSum::new();
            for (h, rv) in sub.graph.horizontal.iter().zip(&geo.returns) {
                let v = sub.graph.edges[h.from].source;
                let (_, reduced) = star_values(&beta.mul(&rv.vector), &pd)?;
                acc.add(sub.tile_freq(v) * reduced.norm_sqr());
            }
            Ok(-geo.c_tr.to_real() * four_pi_sq * acc.value())
        }
    }
}

/// Per-level transversal form values on a dynamical eigenfunction and their
/// window average against the closed-form eigenvalue.
#[derive(Debug, Clone)]
pub struct QTrReport {
    pub per_level: Vec<f64>,
    pub window_average: f64,
    pub closed_form: f64,
    pub relative_deviation: f64,
}

/// `q_{tr,n} = c_tr sum_h freq(t_{s2(h)}) |e^{2 pi i beta(r_h) theta^n} - 1|^2 / rho_tr^{2n}`
/// over a window of levels. The phase `beta(r_h) theta^n` is reduced modulo 1
/// through the exact field trace, leaving only the exponentially small
/// conjugate sum; this sidesteps the catastrophic cancellation of evaluating
/// `theta^n` directly.
pub fn q_tr_numeric(
    sub: &Substitution1D,
    geo: &HorizontalGeometry,
    beta: &FieldElement,
    rho_tr: f64,
    window: std::ops::RangeInclusive<usize>,
) -> Result<QTrReport, TilingError> {
    let pd = pisot_analyze(&sub.field);
    if !pd.pisot {
        return Err(TilingError::NotPisot);
    }
    let expected = pd.conjugates[0].norm();
    if (rho_tr - expected).abs() > 1e-12 {
        return Err(TilingError::ParameterMismatch {
            what: "rho_tr (must be |theta_2|)",
            expected,
            got: rho_tr,
        });
    }
    let (lo, hi) = (*window.start(), *window.end());
    assert!(lo >= 1 && hi >= lo);
    let c_tr = geo.c_tr.to_real();

    // per horizontal pair: p_h = beta * r_h, embeddings at the conjugates
    let pairs: Vec<(f64, FieldElement, Vec<Complex64>)> = sub
        .graph
        .horizontal
        .iter()
        .zip(&geo.returns)
        .map(|(h, rv)| {
            let v = sub.graph.edges[h.from].source;
            let p = beta.mul(&rv.vector);
            let embeds: Vec<Complex64> =
                (1..sub.field.degree).map(|j| p.embed(j)).collect();
            (sub.tile_freq(v), p, embeds)
        })
        .collect();

    let conj_roots: Vec<Complex64> = sub.field.roots[1..].to_vec();
    let mut per_level = Vec::new();
    let mut avg = KahanSum::new();
    // running theta^n multiplications in the field for the exact trace
    let mut theta_pows: Vec<FieldElement> = pairs
        .iter()
        .map(|(_, p, _)| {
            let mut q = p.clone();
            for _ in 0..lo {
                q = q.mul(&sub.theta);
            }
            q
        })
        .collect();
    for n in lo..=hi {
        let mut level = KahanSum::new();
        for (idx, (freq, _, embeds)) in pairs.iter().enumerate() {
            // fractional part of the exact trace
            let tr = theta_pows[idx].trace_exact();
            let frac = (&tr - tr.floor()).to_f64().unwrap();
            // conjugate sum, exponentially small for true eigenvalues
            let mut s = Complex64::new(0.0, 0.0);
            for (e, root) in embeds.iter().zip(&conj_roots) {
                s += e * root.powu(n as u32);
            }
            let y = frac - s.re;
            let numerator = 4.0 * (std::f64::consts::PI * y).sin().powi(2);
            level.add(freq * numerator / rho_tr.powi(2 * n as i32));
            theta_pows[idx] = theta_pows[idx].mul(&sub.theta);
        }
        let value = c_tr * level.value();
        per_level.push(value);
        avg.add(value);
    }
    let window_average = avg.value() / per_level.len() as f64;
    let closed_form = -laplacian_eigenvalue(sub, geo, beta, FormSide::Transversal)?;
    let relative_deviation = if closed_form != 0.0 {
        (window_average - closed_form).abs() / closed_form.abs()
    } else {
        window_average.abs()
    };
    Ok(QTrReport {
        per_level,
        window_average,
        closed_form,
        relative_deviation,
    })
}

/// Real test function on a tile interval with its derivative.
pub struct TestFn1D {
    pub f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub df: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl TestFn1D {
    pub fn linear(slope: f64, intercept: f64) -> Self {
        TestFn1D {
            f: Box::new(move |x| slope * x + intercept),
            df: Box::new(move |_| slope),
        }
    }

    pub fn sine(period: f64) -> Self {
        let w = 2.0 * std::f64::consts::PI / period;
        TestFn1D {
            f: Box::new(move |x| (w * x).sin()),
            df: Box::new(move |x| w * (w * x).cos()),
        }
    }

    pub fn constant(c: f64) -> Self {
        TestFn1D {
            f: Box::new(move |_| c),
            df: Box::new(|_| 0.0),
        }
    }

    pub fn quadratic() -> Self {
        TestFn1D {
            f: Box::new(|x| x * x),
            df: Box::new(|x| 2.0 * x),
        }
    }
}

/// Exact-enumeration longitudinal form at level `n` on tile `v` for any
/// scale parameter; points come from the exact microtile geometry.
pub fn q_lg_raw(
    sub: &Substitution1D,
    v: usize,
    f: &TestFn1D,
    g: &TestFn1D,
    rho_lg: f64,
    n: usize,
) -> f64 {
    let rev = &sub.reversed;
    let scale = rho_lg.powi(-(n as i32));
    let mut acc = KahanSum::new();
    let mut count = 0u64;
    // DFS over reversed paths from v with incremental exact offsets
    let theta_inv = sub.theta.inverse().expect("theta != 0");
    struct Frame {
        partial: FieldElement,
        scale: FieldElement,
        at: usize,
        depth: usize,
    }
    let mut stack = vec![Frame {
        partial: FieldElement::zero(&sub.field),
        scale: FieldElement::one(&sub.field),
        at: v,
        depth: 0,
    }];
    while let Some(frame) = stack.pop() {
        if frame.depth == n {
            for h in &rev.horizontal {
                if rev.edges[h.from].source != frame.at {
                    continue;
                }
                let x_s = frame
                    .partial
                    .add(&frame.scale.mul(&sub.microtile_point(h.from)))
                    .to_real();
                let x_r = frame
                    .partial
                    .add(&frame.scale.mul(&sub.microtile_point(h.to)))
                    .to_real();
                let df = ((f.f)(x_r) - (f.f)(x_s)) * scale;
                let dg = ((g.f)(x_r) - (g.f)(x_s)) * scale;
                acc.add(df * dg);
                count += 1;
            }
            continue;
        }
        for (e, edge) in rev.edges.iter().enumerate() {
            if edge.source != frame.at {
                continue;
            }
            stack.push(Frame {
                partial: frame
                    .partial
                    .add(&frame.scale.mul(&sub.off_sigma[e].mul(&theta_inv))),
                scale: frame.scale.mul(&theta_inv),
                at: edge.range,
                depth: frame.depth + 1,
            });
        }
    }
    assert!(count > 0, "no longitudinal pairs at this level");
    acc.value() / count as f64
}

/// Longitudinal form report: exact enumeration against the quadratic-form
/// closed form `c_lg sum_h freq a_h^2 (1/L_v) integral f' g'`.
#[derive(Debug, Clone)]
pub struct QLgReport {
    pub enumerated: f64,
    pub closed_form: f64,
    pub relative_deviation: f64,
}

pub fn q_lg_numeric(
    sub: &Substitution1D,
    geo: &HorizontalGeometry,
    v: usize,
    f: &TestFn1D,
    g: &TestFn1D,
    rho_lg: f64,
    n: usize,
) -> Result<QLgReport, TilingError> {
    let expected = 1.0 / sub.theta_value();
    if (rho_lg - expected).abs() > 1e-12 {
        return Err(TilingError::ParameterMismatch {
            what: "rho_lg (must be 1/theta)",
            expected,
            got: rho_lg,
        });
    }
    let enumerated = q_lg_raw(sub, v, f, g, rho_lg, n);
    let length = sub.tile_length(v);
    let integral = gauss_integrate(|x| (f.df)(x) * (g.df)(x), 0.0, length);
    let mut weighted = KahanSum::new();
    for (h, mv) in sub.reversed.horizontal.iter().zip(&geo.microtiles) {
        let w = sub.reversed.edges[h.from].source;
        let a = mv.vector.to_real();
        weighted.add(sub.tile_freq(w) * a * a);
    }
    let closed_form = geo.c_lg.to_real() * weighted.value() * integral / length;
    let scale = closed_form.abs().max(1e-30);
    Ok(QLgReport {
        enumerated,
        closed_form,
        relative_deviation: (enumerated - closed_form).abs() / scale,
    })
}

/// Composite 5-point Gauss-Legendre quadrature.
pub fn gauss_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const NODES: [f64; 5] = [
        -0.9061798459386640,
        -0.5384693101056831,
        0.0,
        0.5384693101056831,
        0.9061798459386640,
    ];
    const WEIGHTS: [f64; 5] = [
        0.2369268850561891,
        0.4786286704993665,
        0.5688888888888889,
        0.4786286704993665,
        0.2369268850561891,
    ];
    let panels = 64;
    let h = (b - a) / panels as f64;
    let mut acc = KahanSum::new();
    for i in 0..panels {
        let mid = a + (i as f64 + 0.5) * h;
        for (node, weight) in NODES.iter().zip(WEIGHTS.iter()) {
            acc.add(weight * f(mid + 0.5 * h * node));
        }
    }
    acc.value() * 0.5 * h
}

/// Dynamical-eigenfunction observable `e^{2 pi i beta(x)}` on longitudinal
/// words, evaluated through the exact point geometry.
pub fn eigen_observable(sub: Arc<Substitution1D>, beta: FieldElement) -> ObservableFn {
    let beta_real = beta.clone();
    let eval: SampledFn = Arc::new(move |_, word| {
        let x = sub.point_of_reversed_path(&word.edges).to_real();
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * beta_real.to_real() * x)
    });
    ObservableFn::EigenFn { beta, eval }
}

// ---------------------------------------------------------------------------
// the tensor triple over the whole hull

/// Transversal and longitudinal triples with the tensor dimension data.
pub struct OmegaTriple {
    pub transversal: Spectra,
    pub longitudinal: Spectra,
    pub s_tr: f64,
    pub s_lg: f64,
    pub s0: f64,
}

pub fn omega_triple(
    sub: &Substitution1D,
    rho_tr: f64,
    rho_lg: f64,
) -> Result<OmegaTriple, TilingError> {
    let transversal = Spectra::analyze(&sub.transversal_graph(rho_tr)?)?;
    let longitudinal = Spectra::analyze(&sub.longitudinal_graph(rho_lg)?)?;
    let theta = sub.theta_value();
    let s_tr = theta.ln() / -rho_tr.ln();
    let s_lg = theta.ln() / -rho_lg.ln();
    Ok(OmegaTriple {
        transversal,
        longitudinal,
        s_tr,
        s_lg,
        s0: s_tr + s_lg,
    })
}

impl OmegaTriple {
    /// Per-prototile residues of the tensor zeta function at `s0`, through
    /// the mean of the product of the two leading heat-coefficient
    /// functions. Each must be a strictly positive real number.
    pub fn residues(&self, sub: &Substitution1D, k_max: i64) -> Result<Vec<f64>, TilingError> {
        let r_tr = self.transversal.heat_period();
        let r_lg = self.longitudinal.heat_period();
        let a = Complex64::new(sub.theta_value().ln(), 0.0);
        let c_tr = self.transversal.coeffs.c[0];
        let c_lg = self.longitudinal.coeffs.c[0];
        let gamma_half_s0 = real_gamma(self.s0 / 2.0).map_err(|_| TilingError::NotPisot)?;
        let sum_l: f64 = (0..sub.alphabet.len()).map(|v| sub.tile_length(v)).sum();
        let mut out = Vec::new();
        for v in 0..sub.alphabet.len() {
            let c1 = c_tr * sub.tile_freq(v);
            let c2 = c_lg * sub.tile_length(v) / sum_l;
            let mean = tensor_leading_mean(c1, r_tr, a, c2, r_lg, a, k_max);
            out.push(2.0 * mean.re / gamma_half_s0);
        }
        Ok(out)
    }
}

// letter statistics used by the frequency cross-check
pub fn letter_counts(sub: &Substitution1D, letter: usize, n: usize) -> Vec<BigRational> {
    let power = sub.matrix.pow(n);
    (0..sub.alphabet.len())
        .map(|u| BigRational::from_integer(power.get(u, letter).clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const PHI: f64 = 1.618033988749894848;

    fn fib() -> Substitution1D {
        fixtures::fibonacci_substitution().unwrap()
    }

    fn trib() -> Substitution1D {
        fixtures::tribonacci_substitution().unwrap()
    }

    #[test]
    fn fibonacci_build() {
        let sub = fib();
        assert!((sub.theta_value() - PHI).abs() < 1e-13);
        // lengths proportional to (phi, 1), frequencies to PF right vector
        assert!((sub.tile_length(0) / sub.tile_length(1) - PHI).abs() < 1e-12);
        assert!((sub.tile_freq(0) - 0.6180339887498949).abs() < 1e-12);
        assert!((sub.tile_freq(1) - 0.3819660112501051).abs() < 1e-12);
        // exact normalizations
        let sum_r = sub.freqs[0].add(&sub.freqs[1]);
        assert_eq!(sum_r, FieldElement::one(&sub.field));
        let rl = sub.freqs[0]
            .mul(&sub.lengths[0])
            .add(&sub.freqs[1].mul(&sub.lengths[1]));
        assert_eq!(rl, FieldElement::one(&sub.field));
    }

    #[test]
    fn tribonacci_theta() {
        let sub = trib();
        assert!((sub.theta_value() - 1.8392867552141612).abs() < 1e-10);
    }

    #[test]
    fn thue_morse_accepted_but_not_pisot() {
        let sub = Substitution1D::build(&fixtures::thue_morse_rules()).unwrap();
        assert_eq!(sub.theta_value(), 2.0);
        assert!(matches!(
            dirichlet_parameters(&sub, 100),
            Err(TilingError::NotPisot)
        ));
    }

    #[test]
    fn supertile_offsets_fibonacci() {
        let sub = fib();
        // sigma(a) = ab: offsets (0, L_a)
        let level1 = sub.supertile_offsets(0, 1).unwrap();
        assert_eq!(level1.len(), 2);
        assert_eq!(level1[0].0, 0);
        assert!(level1[0].1.is_zero());
        assert_eq!(level1[1].0, 1);
        assert_eq!(level1[1].1, sub.lengths[0]);
        // sigma^2(a) = ab a: offsets (0, L_a, L_a + L_b)
        let level2 = sub.supertile_offsets(0, 2).unwrap();
        assert_eq!(level2.len(), 3);
        assert_eq!(level2[2].1, sub.lengths[0].add(&sub.lengths[1]));
        // n = 0 is the tile itself
        let level0 = sub.supertile_offsets(1, 0).unwrap();
        assert_eq!(level0, vec![(1, FieldElement::zero(&sub.field))]);
    }

    #[test]
    fn return_vectors_fibonacci() {
        let sub = fib();
        let rv = return_vectors(&sub).unwrap();
        assert_eq!(rv.len(), 2);
        // the two orientations carry opposite vectors theta L_a
        let expected = sub.theta.mul(&sub.lengths[0]);
        for r in &rv {
            assert_eq!(r.meeting_depth, 2);
            assert!(r.vector == expected || r.vector == expected.neg());
        }
        // the vector is a difference of supertile offsets at the meeting depth
        let offsets = sub.supertile_offsets(0, 2).unwrap();
        let diff = offsets[2].1.sub(&offsets[0].1);
        assert_eq!(diff, expected);
    }

    #[test]
    fn return_vectors_scale_with_level() {
        // r_e = theta^n r_h against direct offset arithmetic at levels <= 6
        let sub = fib();
        let rv = return_vectors(&sub).unwrap();
        let g = &sub.graph;
        for r in &rv {
            let h = &g.horizontal[r.pair];
            for n in 0..=6usize {
                // prefix-length n: accumulate the differences shifted by n
                let mut x = h.from;
                let mut y = h.to;
                let mut theta_pow = FieldElement::one(&sub.field);
                for _ in 0..n {
                    theta_pow = theta_pow.mul(&sub.theta);
                }
                let mut acc = FieldElement::zero(&sub.field);
                let mut pw = theta_pow.clone();
                for _ in 0..(sub.alphabet.len() + 3) {
                    if x == y {
                        break;
                    }
                    acc = acc.add(&pw.mul(&sub.off_sigma[y].sub(&sub.off_sigma[x])));
                    pw = pw.mul(&sub.theta);
                    x = g.tau[x];
                    y = g.tau[y];
                }
                assert_eq!(acc, theta_pow.mul(&r.vector), "level {n}");
            }
        }
    }

    #[test]
    fn microtile_vectors_fibonacci() {
        let sub = fib();
        let mv = microtile_vectors(&sub);
        assert_eq!(mv.len(), 2);
        // dec(a) = [a, b]: the two microtile punctures differ by L_a/theta = L_b
        let expected = sub.lengths[1].clone();
        for m in &mv {
            assert!(m.vector == expected || m.vector == expected.neg());
        }
    }

    #[test]
    fn microtile_vectors_scale_with_level() {
        let sub = trib();
        let mv = microtile_vectors(&sub);
        let theta_inv = sub.theta.inverse().unwrap();
        for m in &mv {
            let h = &sub.reversed.horizontal[m.pair];
            let v = sub.reversed.edges[h.from].source;
            for n in 1..=6usize {
                // pick any reversed path of length n from some vertex ending at v
                let paths = sub.reversed.enumerate_paths(n);
                let path = paths
                    .iter()
                    .find(|p| sub.reversed.edges[*p.last().unwrap()].range == v)
                    .unwrap();
                let mut x_edges = path.clone();
                x_edges.push(h.from);
                let mut y_edges = path.clone();
                y_edges.push(h.to);
                let xs = sub.point_of_reversed_path(&x_edges);
                let xr = sub.point_of_reversed_path(&y_edges);
                let mut scale = FieldElement::one(&sub.field);
                for _ in 0..n {
                    scale = scale.mul(&theta_inv);
                }
                assert_eq!(xr.sub(&xs), scale.mul(&m.vector), "level {n}");
            }
        }
    }

    #[test]
    fn geometry_constants_fibonacci() {
        let sub = fib();
        let geo = horizontal_geometry(&sub).unwrap();
        // c_tr = 1/(2 L_a), c_lg = 1/(2 R_a)
        let expected_ctr = 1.0 / (2.0 * sub.tile_length(0));
        let expected_clg = 1.0 / (2.0 * sub.tile_freq(0));
        assert!((geo.c_tr.to_real() - expected_ctr).abs() < 1e-12);
        assert!((geo.c_lg.to_real() - expected_clg).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_parameters_fibonacci_and_tribonacci() {
        let fibp = dirichlet_parameters(&fib(), 10_000).unwrap();
        assert!((fibp.rho_tr - 1.0 / PHI).abs() < 1e-12);
        assert!((fibp.rho_lg - 1.0 / PHI).abs() < 1e-12);
        assert!(fibp.vacuous);

        let tribp = dirichlet_parameters(&trib(), 10_000).unwrap();
        assert!((tribp.rho_tr - 0.7373527057603281).abs() < 1e-6);
        assert!((tribp.rho_lg - 1.0 / 1.8392867552141612).abs() < 1e-10);
        assert!(!tribp.vacuous);
        for (_, check) in &tribp.resonance {
            assert!(check.resonant_at.is_none());
            assert!(check.min_gap > 0.0);
        }
    }

    #[test]
    fn laplacian_eigenvalues_fibonacci() {
        let sub = fib();
        let geo = horizontal_geometry(&sub).unwrap();
        // beta with beta(r_h) = theta: the transversal factor is theta_2^2
        let r_h = &geo.returns[0].vector;
        let beta = sub.theta.mul(&r_h.inverse().unwrap());
        let value = laplacian_eigenvalue(&sub, &geo, &beta, FormSide::Transversal).unwrap();
        let theta2 = (1.0 - 5.0_f64.sqrt()) / 2.0;
        let expected = -geo.c_tr.to_real()
            * (2.0 * std::f64::consts::PI).powi(2)
            * (2.0 * sub.tile_freq(0))
            * theta2.powi(2);
        assert!((value - expected).abs() < 1e-10 * expected.abs());

        // beta = 0 kills both sides
        let zero = FieldElement::zero(&sub.field);
        assert_eq!(
            laplacian_eigenvalue(&sub, &geo, &zero, FormSide::Transversal).unwrap(),
            0.0
        );
        assert_eq!(
            laplacian_eigenvalue(&sub, &geo, &zero, FormSide::Longitudinal).unwrap(),
            0.0
        );
    }

    #[test]
    fn laplacian_quadratic_scaling() {
        let sub = fib();
        let geo = horizontal_geometry(&sub).unwrap();
        let beta = FieldElement::one(&sub.field);
        let beta2 = FieldElement::from_integer(&sub.field, 2).mul(&beta);
        for side in [FormSide::Transversal, FormSide::Longitudinal] {
            let v1 = laplacian_eigenvalue(&sub, &geo, &beta, side).unwrap();
            let v2 = laplacian_eigenvalue(&sub, &geo, &beta2, side).unwrap();
            assert!(v1 <= 0.0 && v2 <= 0.0);
            assert!((v2 - 4.0 * v1).abs() < 1e-9 * v1.abs().max(1e-12));
        }
    }

    #[test]
    fn q_tr_matches_eigenvalue_fibonacci() {
        let sub = fib();
        let geo = horizontal_geometry(&sub).unwrap();
        let params = dirichlet_parameters(&sub, 100).unwrap();
        let beta = sub.theta.mul(&geo.returns[0].vector.inverse().unwrap());
        let report = q_tr_numeric(&sub, &geo, &beta, params.rho_tr, 20..=40).unwrap();
        assert!(
            report.relative_deviation < 0.01,
            "deviation {}",
            report.relative_deviation
        );
    }

    #[test]
    fn q_tr_zero_beta() {
        let sub = fib();
        let geo = horizontal_geometry(&sub).unwrap();
        let params = dirichlet_parameters(&sub, 100).unwrap();
        let zero = FieldElement::zero(&sub.field);
        let report = q_tr_numeric(&sub, &geo, &zero, params.rho_tr, 5..=10).unwrap();
        assert_eq!(report.window_average, 0.0);
        assert_eq!(report.closed_form, 0.0);
    }

    #[test]
    fn q_tr_rejects_wrong_rho() {
        let sub = fib();
        let geo = horizontal_geometry(&sub).unwrap();
        let beta = FieldElement::one(&sub.field);
        assert!(matches!(
            q_tr_numeric(&sub, &geo, &beta, 0.5, 5..=8),
            Err(TilingError::ParameterMismatch { .. })
        ));
    }

    #[test]
    fn q_tr_matches_eigenvalue_tribonacci() {
        let sub = trib();
        let geo = horizontal_geometry(&sub).unwrap();
        let params = dirichlet_parameters(&sub, 100).unwrap();
        // an eigenvalue-like frequency: beta(r) = theta for the first pair
        let beta = sub.theta.mul(&geo.returns[0].vector.inverse().unwrap());
        let report = q_tr_numeric(&sub, &geo, &beta, params.rho_tr, 20..=60).unwrap();
        assert!(
            report.relative_deviation < 0.05,
            "deviation {}",
            report.relative_deviation
        );
    }

    #[test]
    fn q_lg_matches_quadratic_form() {
        let sub = fib();
        let geo = horizontal_geometry(&sub).unwrap();
        let rho_lg = 1.0 / sub.theta_value();
        let la = sub.tile_length(0);
        for (f, g, tol) in [
            (TestFn1D::linear(1.3, 0.2), TestFn1D::linear(-0.7, 0.0), 0.01),
            (TestFn1D::sine(la), TestFn1D::sine(la), 0.02),
            (TestFn1D::quadratic(), TestFn1D::linear(1.0, 0.0), 0.02),
        ] {
            let report = q_lg_numeric(&sub, &geo, 0, &f, &g, rho_lg, 12).unwrap();
            assert!(
                report.relative_deviation < tol,
                "{} vs {} (dev {})",
                report.enumerated,
                report.closed_form,
                report.relative_deviation
            );
        }
        // constants vanish exactly
        let c = TestFn1D::constant(2.0);
        let report = q_lg_numeric(&sub, &geo, 0, &c, &c, rho_lg, 8).unwrap();
        assert_eq!(report.enumerated, 0.0);
    }

    #[test]
    fn q_lg_trichotomy() {
        let sub = fib();
        let theta_inv = 1.0 / sub.theta_value();
        let f = TestFn1D::sine(sub.tile_length(0));
        // larger rho: sequence dies; smaller rho: it blows up
        let shrink_hi = q_lg_raw(&sub, 0, &f, &f, theta_inv + 0.05, 12)
            / q_lg_raw(&sub, 0, &f, &f, theta_inv + 0.05, 6);
        assert!(shrink_hi < 0.5, "ratio {shrink_hi}");
        let grow_lo = q_lg_raw(&sub, 0, &f, &f, theta_inv - 0.05, 12)
            / q_lg_raw(&sub, 0, &f, &f, theta_inv - 0.05, 6);
        assert!(grow_lo > 2.0, "ratio {grow_lo}");
    }

    #[test]
    fn eigenfn_form_reproduces_longitudinal_eigenvalue() {
        // q_n on the reversed graph with the eigenfunction observable
        // converges to theta^2 times the closed-form eigenvalue (the level
        // offset between the two form conventions contributes theta^2)
        let sub = Arc::new(fib());
        let geo = horizontal_geometry(&sub).unwrap();
        let beta = FieldElement::one(&sub.field);
        let expected = -laplacian_eigenvalue(&sub, &geo, &beta, FormSide::Longitudinal).unwrap()
            * sub.theta_value().powi(2);
        let g = sub.longitudinal_graph(1.0 / sub.theta_value()).unwrap();
        let obs = eigen_observable(Arc::clone(&sub), beta);
        let report = crate::forms::q_limit(&g, &obs, &obs, 14).unwrap();
        assert!(
            (report.limit.re - expected).abs() < 0.02 * expected.abs(),
            "{} vs {expected}",
            report.limit.re
        );
    }

    #[test]
    fn omega_dimension_formula() {
        let sub = fib();
        let rho = 1.0 / sub.theta_value();
        let omega = omega_triple(&sub, rho, rho).unwrap();
        assert!((omega.s0 - 2.0).abs() < 1e-12);
        assert!((omega.s_tr - 1.0).abs() < 1e-12);
        // residues are strictly positive
        let residues = omega.residues(&sub, 40).unwrap();
        assert!(residues.iter().all(|&r| r > 0.0));
    }

    #[test]
    fn omega_dimension_tribonacci_asymmetric() {
        let sub = trib();
        let params = dirichlet_parameters(&sub, 100).unwrap();
        let omega = omega_triple(&sub, params.rho_tr, params.rho_lg).unwrap();
        let theta = sub.theta_value();
        let expected = theta.ln() / -params.rho_tr.ln() + 1.0;
        assert!((omega.s0 - expected).abs() < 1e-12);
    }

    #[test]
    fn letter_frequencies_match_counts() {
        for sub in [fib(), trib()] {
            let counts = letter_counts(&sub, 0, 15);
            let total: f64 = counts.iter().map(|c| c.to_f64().unwrap()).sum();
            for (u, c) in counts.iter().enumerate() {
                let measured = c.to_f64().unwrap() / total;
                assert!(
                    (measured - sub.tile_freq(u)).abs() < 1e-4,
                    "letter {u}: {measured} vs {}",
                    sub.tile_freq(u)
                );
            }
        }
    }
}
