//! Partitioned BCH codes.
//!
//! A code of length `n = 2^m - 1` is split into a masking layer of `l`
//! redundancy symbols and an error-correcting layer of `r` symbols. Both layers
//! are narrow-sense BCH codes:
//!
//! * `G0` (`n x l`) has row `i` equal to the coefficients of `x^i mod g0(x)`, so
//!   `G0^T c` is the remainder of `c(x)` modulo the masking generator and
//!   `{c : G0^T c = 0}` is the BCH code of redundancy `l`.
//! * `H` (`n x r`) is built the same way from the error-correcting generator,
//!   so the code `C = {c : H^T c = 0}` has dimension `k + l`.
//!
//! `G1` completes a basis of `colspace(G0)` to a basis of `C`, and `G1tilde`
//! recovers the message: `G1tilde^T G1 = I_k` and `G1tilde^T G0 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{BinaryField, Gf2Poly};
use crate::gf2::{BitMatrix, BitVec, EchelonBasis};

/// Generator of the narrow-sense BCH code with designed correction capability
/// `t`: the lcm of the minimal polynomials of `α, α^2, ..., α^(2t)`.
pub fn bch_generator_polynomial(field: &BinaryField, t: usize) -> Result<Gf2Poly> {
    let n = field.order();
    if t == 0 {
        return Err(Error::Parameter("BCH correction capability must be at least 1".into()));
    }
    if 2 * t > n {
        return Err(Error::Parameter(format!(
            "t = {t} needs {} consecutive roots but the field has only {n} nonzero elements",
            2 * t
        )));
    }
    let mut covered = vec![false; n];
    let mut g = Gf2Poly::one();
    for j in 1..=2 * t {
        if covered[j] {
            continue;
        }
        for c in field.cyclotomic_coset(j) {
            covered[c] = true;
        }
        g = g.lcm(&field.minimal_polynomial(field.alpha_pow(j as i64)));
    }
    Ok(g)
}

/// Designed distance of the cyclic code generated by `g`: one more than the
/// length of the run of consecutive roots `α, α^2, ...`.
pub fn designed_distance(field: &BinaryField, g: &Gf2Poly) -> usize {
    let n = field.order();
    let run = (1..n)
        .take_while(|&j| g.eval(field, field.alpha_pow(j as i64)) == 0)
        .count();
    run + 1
}

/// Narrow-sense BCH generator whose degree is exactly `redundancy`, together
/// with its designed distance. `Ok(None)` for zero redundancy.
pub fn bch_layer(field: &BinaryField, redundancy: usize) -> Result<Option<(Gf2Poly, usize)>> {
    if redundancy == 0 {
        return Ok(None);
    }
    let n = field.order();
    let mut t = 1;
    while 2 * t <= n {
        let g = bch_generator_polynomial(field, t)?;
        let deg = g.degree().unwrap_or(0);
        if deg == redundancy {
            let d = designed_distance(field, &g);
            return Ok(Some((g, d)));
        }
        if deg > redundancy {
            break;
        }
        t += 1;
    }
    Err(Error::Parameter(format!(
        "no narrow-sense BCH code of length {n} has redundancy {redundancy}"
    )))
}

/// Parameters of a partitioned code without its matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeShape {
    pub m: u32,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub r: usize,
    /// Designed distance of the masking layer; 0 when `l = 0`.
    pub d0: usize,
    /// Designed distance of the error-correcting layer; 0 when `r = 0`.
    pub d1: usize,
}

impl CodeShape {
    /// Resolves `(d0, d1)` for the given split. Does not check nesting.
    pub fn new(m: u32, k: usize, l: usize) -> Result<Self> {
        let field = BinaryField::new(m)?;
        Self::with_field(&field, k, l)
    }

    pub(crate) fn with_field(field: &BinaryField, k: usize, l: usize) -> Result<Self> {
        let n = field.order();
        if k == 0 {
            return Err(Error::Parameter("message length k must be at least 1".into()));
        }
        if k + l > n {
            return Err(Error::Parameter(format!("k + l = {} exceeds n = {n}", k + l)));
        }
        let r = n - k - l;
        let d0 = bch_layer(field, l)?.map_or(0, |(_, d)| d);
        let d1 = bch_layer(field, r)?.map_or(0, |(_, d)| d);
        Ok(Self {
            m: field.m(),
            n,
            k,
            l,
            r,
            d0,
            d1,
        })
    }

    /// `d0` with the empty masking layer treated as distance 1.
    pub fn d0e(&self) -> usize {
        self.d0.max(1)
    }

    /// `d1` with the empty error-correcting layer treated as distance 1.
    pub fn d1e(&self) -> usize {
        self.d1.max(1)
    }

    pub fn t0(&self) -> usize {
        (self.d0e() - 1) / 2
    }

    pub fn t1(&self) -> usize {
        (self.d1e() - 1) / 2
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }
}

/// All splits `l + r = n - k` with both layers realizable as narrow-sense BCH
/// codes, in increasing `l`. `l` runs over multiples of `m`.
pub fn candidate_shapes(m: u32, k: usize) -> Result<Vec<CodeShape>> {
    let field = BinaryField::new(m)?;
    let n = field.order();
    if k == 0 || k > n {
        return Err(Error::Parameter(format!("k = {k} outside 1..={n}")));
    }
    let red = n - k;
    let shapes: Vec<CodeShape> = (0..=red)
        .step_by(m as usize)
        .filter(|l| (red - l).is_multiple_of(m as usize))
        .filter_map(|l| CodeShape::with_field(&field, k, l).ok())
        .collect();
    if shapes.is_empty() {
        return Err(Error::Parameter(format!(
            "no realizable (l, r) split for m = {m}, k = {k}"
        )));
    }
    Ok(shapes)
}

/// An `[n, k, l]` partitioned BCH code.
#[derive(Clone, Debug)]
pub struct PartitionedCode {
    pub shape: CodeShape,
    field: BinaryField,
    g_mask: Option<Gf2Poly>,
    g_err: Option<Gf2Poly>,
    g1: BitMatrix,
    g0: BitMatrix,
    h: BitMatrix,
    g1_tilde: BitMatrix,
    g0_t: BitMatrix,
    h_t: BitMatrix,
    g1_tilde_t: BitMatrix,
}

/// `n x deg(g)` matrix whose row `i` holds the coefficients of `x^i mod g(x)`.
fn remainder_matrix(n: usize, g: Option<&Gf2Poly>) -> BitMatrix {
    let Some(g) = g else {
        return BitMatrix::zeros(n, 0);
    };
    let deg = g.degree().unwrap_or(0);
    let mut out = BitMatrix::zeros(n, deg);
    // running remainder of x^i, as a bit vector of length deg
    let mut cur = BitVec::zeros(deg);
    if deg > 0 {
        cur.set(0, true);
    }
    for i in 0..n {
        out.set_row(i, &cur);
        // multiply by x and reduce
        let carry = deg > 0 && cur.get(deg - 1);
        let mut next = BitVec::zeros(deg);
        for j in (1..deg).rev() {
            if cur.get(j - 1) {
                next.set(j, true);
            }
        }
        if carry {
            for j in 0..deg {
                if g.coeff(j) {
                    next.flip(j);
                }
            }
        }
        cur = next;
    }
    out
}

impl PartitionedCode {
    pub fn n(&self) -> usize {
        self.shape.n
    }
    pub fn k(&self) -> usize {
        self.shape.k
    }
    pub fn l(&self) -> usize {
        self.shape.l
    }
    pub fn r(&self) -> usize {
        self.shape.r
    }
    pub fn d0(&self) -> usize {
        self.shape.d0
    }
    pub fn d1(&self) -> usize {
        self.shape.d1
    }
    pub fn t0(&self) -> usize {
        self.shape.t0()
    }
    pub fn t1(&self) -> usize {
        self.shape.t1()
    }
    pub fn field(&self) -> &BinaryField {
        &self.field
    }
    /// Generator of the masking layer, `None` when `l = 0`.
    pub fn masking_generator(&self) -> Option<&Gf2Poly> {
        self.g_mask.as_ref()
    }
    /// Generator of the error-correcting layer, `None` when `r = 0`.
    pub fn error_generator(&self) -> Option<&Gf2Poly> {
        self.g_err.as_ref()
    }
    /// `n x k` message generator.
    pub fn g1(&self) -> &BitMatrix {
        &self.g1
    }
    /// `n x l` masking generator.
    pub fn g0(&self) -> &BitMatrix {
        &self.g0
    }
    /// `n x r` parity-check matrix of the whole code.
    pub fn h_tilde(&self) -> &BitMatrix {
        &self.h
    }
    /// `n x k` message inverse.
    pub fn g1_tilde(&self) -> &BitMatrix {
        &self.g1_tilde
    }
    pub fn g0_t(&self) -> &BitMatrix {
        &self.g0_t
    }
    pub fn h_tilde_t(&self) -> &BitMatrix {
        &self.h_t
    }
    pub fn g1_tilde_t(&self) -> &BitMatrix {
        &self.g1_tilde_t
    }

    /// `G1 m`.
    pub fn message_codeword(&self, m: &BitVec) -> BitVec {
        self.g1.mul_vec(m)
    }

    /// `G0 d`.
    pub fn masking_codeword(&self, d: &BitVec) -> BitVec {
        self.g0.mul_vec(d)
    }

    /// `H^T y`.
    pub fn syndrome(&self, y: &BitVec) -> BitVec {
        self.h_t.mul_vec(y)
    }

    /// `G1tilde^T c`.
    pub fn extract_message(&self, c: &BitVec) -> BitVec {
        self.g1_tilde_t.mul_vec(c)
    }

    /// Checks every defining identity of the code.
    pub fn verify_invariants(&self) -> Result<()> {
        let (n, k, l, r) = (self.n(), self.k(), self.l(), self.r());
        let fail = |what: &str| {
            Err(Error::Construction(format!(
                "{what} (n = {n}, k = {k}, l = {l}, r = {r})"
            )))
        };
        if (self.g1.rows(), self.g1.cols()) != (n, k)
            || (self.g0.rows(), self.g0.cols()) != (n, l)
            || (self.h.rows(), self.h.cols()) != (n, r)
            || (self.g1_tilde.rows(), self.g1_tilde.cols()) != (n, k)
        {
            return fail("matrix dimensions disagree with the code shape");
        }
        if self.g1_tilde_t.mul(&self.g1) != BitMatrix::identity(k) {
            return fail("G1tilde^T G1 is not the identity");
        }
        if !self.g1_tilde_t.mul(&self.g0).is_zero() {
            return fail("G1tilde^T G0 is not zero");
        }
        if !self.h_t.mul(&self.g1).is_zero() {
            return fail("H^T G1 is not zero");
        }
        if !self.h_t.mul(&self.g0).is_zero() {
            return fail("H^T G0 is not zero: the masking layer is not nested in the code");
        }
        if self.g1.hstack(&self.g0).rank() != k + l {
            return fail("[G1 | G0] does not have full column rank");
        }
        Ok(())
    }
}

/// Builds the `[2^m - 1, k, l]` partitioned BCH code.
pub fn build_pbch(m: u32, k: usize, l: usize) -> Result<PartitionedCode> {
    let field = BinaryField::new(m)?;
    build_with_field(field, k, l)
}

fn build_with_field(field: BinaryField, k: usize, l: usize) -> Result<PartitionedCode> {
    let shape = CodeShape::with_field(&field, k, l)?;
    let n = shape.n;
    let g_mask = bch_layer(&field, shape.l)?.map(|(g, _)| g);
    let g_err = bch_layer(&field, shape.r)?.map(|(g, _)| g);

    let g0 = remainder_matrix(n, g_mask.as_ref());
    let h = remainder_matrix(n, g_err.as_ref());
    let g0_t = g0.transpose();
    let h_t = h.transpose();

    if !h_t.mul(&g0).is_zero() {
        return Err(Error::Construction(format!(
            "masking layer (l = {}) is not nested in the error-correcting layer (r = {}) for n = {n}",
            shape.l, shape.r
        )));
    }

    let mut span = EchelonBasis::new(n);
    for j in 0..shape.l {
        if !span.insert(&g0.column(j)) {
            return Err(Error::Construction(format!(
                "G0 has rank below l = {}",
                shape.l
            )));
        }
    }
    let null = h_t.nullspace_rows();
    let mut g1_cols = Vec::with_capacity(k);
    for i in 0..null.rows() {
        if g1_cols.len() == k {
            break;
        }
        let v = null.row(i);
        if span.insert(&v) {
            g1_cols.push(v);
        }
    }
    if g1_cols.len() != k {
        return Err(Error::Construction(format!(
            "could only find {} of {k} message generator columns",
            g1_cols.len()
        )));
    }
    let g1 = BitMatrix::from_rows(n, &g1_cols).transpose();
    let g1_tilde_t = message_inverse(&g1, &g0)?;
    let g1_tilde = g1_tilde_t.transpose();

    let code = PartitionedCode {
        shape,
        field,
        g_mask,
        g_err,
        g1,
        g0,
        h,
        g1_tilde,
        g0_t,
        h_t,
        g1_tilde_t,
    };
    code.verify_invariants()?;
    Ok(code)
}

/// `k x n` matrix `G1tilde^T` with `G1tilde^T [G1 | G0] = [I_k | 0]`, supported on
/// an information set of `[G1 | G0]`.
fn message_inverse(g1: &BitMatrix, g0: &BitMatrix) -> Result<BitMatrix> {
    let n = g1.rows();
    let k = g1.cols();
    let g = g1.hstack(g0);
    let info = g.transpose().rref().pivots;
    if info.len() != g.cols() {
        return Err(Error::Construction("[G1 | G0] is rank deficient".into()));
    }
    let inv = g
        .select_rows(&info)?
        .inverse()
        .ok_or_else(|| Error::Construction("information set submatrix is singular".into()))?;
    let mut out = BitMatrix::zeros(k, n);
    for i in 0..k {
        for (j, &pos) in info.iter().enumerate() {
            if inv.get(i, j) {
                out.set(i, pos, true);
            }
        }
    }
    Ok(out)
}

/// Serializable form of a code. Matrix rows are hexadecimal integers whose
/// bit `j` is column `j`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CodeDocument {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub r: usize,
    pub m: u32,
    pub primitive_polynomial: String,
    pub d0: usize,
    pub d1: usize,
    pub g1: Vec<String>,
    pub g0: Vec<String>,
    pub h_tilde: Vec<String>,
    pub g1_tilde: Vec<String>,
}

fn row_to_hex(v: &BitVec) -> String {
    let words = v.words();
    let top = words.iter().rposition(|&w| w != 0);
    match top {
        None => "0".into(),
        Some(t) => {
            let mut s = format!("{:x}", words[t]);
            for w in words[..t].iter().rev() {
                s.push_str(&format!("{w:016x}"));
            }
            s
        }
    }
}

fn row_from_hex(s: &str, len: usize) -> Result<BitVec> {
    let s = s.trim_start_matches("0x");
    let mut v = BitVec::zeros(len);
    for (i, ch) in s.chars().rev().enumerate() {
        let d = ch
            .to_digit(16)
            .ok_or_else(|| Error::Format(format!("invalid hex digit {ch:?}")))?;
        for b in 0..4 {
            if (d >> b) & 1 == 1 {
                let pos = 4 * i + b;
                if pos >= len {
                    return Err(Error::Format(format!("row {s} has more than {len} columns")));
                }
                v.set(pos, true);
            }
        }
    }
    Ok(v)
}

fn matrix_to_hex(m: &BitMatrix) -> Vec<String> {
    (0..m.rows()).map(|i| row_to_hex(&m.row(i))).collect()
}

fn matrix_from_hex(rows: &[String], n: usize, cols: usize, name: &str) -> Result<BitMatrix> {
    if rows.len() != n {
        return Err(Error::Format(format!("{name} has {} rows, expected {n}", rows.len())));
    }
    let parsed = rows
        .iter()
        .map(|r| row_from_hex(r, cols))
        .collect::<Result<Vec<_>>>()?;
    Ok(BitMatrix::from_rows(cols, &parsed))
}

impl PartitionedCode {
    pub fn to_document(&self) -> CodeDocument {
        CodeDocument {
            n: self.n(),
            k: self.k(),
            l: self.l(),
            r: self.r(),
            m: self.shape.m,
            primitive_polynomial: format!("{:#x}", self.field.primitive_polynomial()),
            d0: self.d0(),
            d1: self.d1(),
            g1: matrix_to_hex(&self.g1),
            g0: matrix_to_hex(&self.g0),
            h_tilde: matrix_to_hex(&self.h),
            g1_tilde: matrix_to_hex(&self.g1_tilde),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    /// Rebuilds a code from its document. The BCH layers must match the
    /// canonical construction for the recorded field; `G1` and `G1tilde` may be
    /// any matrices satisfying the code identities.
    pub fn from_document(doc: &CodeDocument) -> Result<Self> {
        let poly = u32::from_str_radix(doc.primitive_polynomial.trim_start_matches("0x"), 16)
            .map_err(|e| Error::Format(format!("primitive polynomial: {e}")))?;
        let field = BinaryField::with_polynomial(doc.m, poly)?;
        let shape = CodeShape::with_field(&field, doc.k, doc.l)?;
        if shape.n != doc.n || shape.r != doc.r || shape.d0 != doc.d0 || shape.d1 != doc.d1 {
            return Err(Error::Format(format!(
                "document parameters (n={}, r={}, d0={}, d1={}) disagree with the construction ({}, {}, {}, {})",
                doc.n, doc.r, doc.d0, doc.d1, shape.n, shape.r, shape.d0, shape.d1
            )));
        }
        let n = shape.n;
        let g_mask = bch_layer(&field, shape.l)?.map(|(g, _)| g);
        let g_err = bch_layer(&field, shape.r)?.map(|(g, _)| g);
        let g0 = matrix_from_hex(&doc.g0, n, shape.l, "g0")?;
        let h = matrix_from_hex(&doc.h_tilde, n, shape.r, "h_tilde")?;
        if g0 != remainder_matrix(n, g_mask.as_ref()) || h != remainder_matrix(n, g_err.as_ref()) {
            return Err(Error::Format(
                "g0 / h_tilde do not match the BCH layers of the recorded field".into(),
            ));
        }
        let g1 = matrix_from_hex(&doc.g1, n, shape.k, "g1")?;
        let g1_tilde = matrix_from_hex(&doc.g1_tilde, n, shape.k, "g1_tilde")?;
        let code = PartitionedCode {
            shape,
            field,
            g_mask,
            g_err,
            g0_t: g0.transpose(),
            h_t: h.transpose(),
            g1_tilde_t: g1_tilde.transpose(),
            g1,
            g0,
            h,
            g1_tilde,
        };
        code.verify_invariants()?;
        Ok(code)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::index::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generator_degrees() {
        let f5 = BinaryField::new(5).unwrap();
        assert_eq!(bch_generator_polynomial(&f5, 1).unwrap().degree(), Some(5));
        let f10 = BinaryField::new(10).unwrap();
        assert_eq!(bch_generator_polynomial(&f10, 5).unwrap().degree(), Some(50));
        let f4 = BinaryField::new(4).unwrap();
        let g = bch_generator_polynomial(&f4, 2).unwrap();
        // (x^4+x+1)(x^4+x^3+x^2+x+1)
        assert_eq!(g, Gf2Poly::from_u64(0x13).mul(&Gf2Poly::from_u64(0x1F)));
        assert_eq!(g.degree(), Some(8));
        assert_eq!(designed_distance(&f4, &g), 5);
        assert!(bch_generator_polynomial(&f4, 0).is_err());
        assert!(bch_generator_polynomial(&f4, 8).is_err());
    }

    #[test]
    fn n31_layer_distances() {
        let f = BinaryField::new(5).unwrap();
        for (red, d) in [(5, 3), (10, 5), (15, 7), (20, 11), (25, 15)] {
            assert_eq!(bch_layer(&f, red).unwrap().unwrap().1, d, "redundancy {red}");
        }
        assert!(bch_layer(&f, 7).is_err());
        assert!(bch_layer(&f, 0).unwrap().is_none());
    }

    /// Minimum nonzero weight of `{c : M^T c = 0}` by brute force.
    fn brute_min_distance(mt: &BitMatrix) -> usize {
        let n = mt.cols();
        (1u64..1 << n)
            .filter(|&x| mt.mul_vec(&BitVec::from_words(n, vec![x])).is_zero())
            .map(|x| x.count_ones() as usize)
            .min()
            .unwrap()
    }

    #[test]
    fn small_code_15_7_4() {
        let c = build_pbch(4, 7, 4).unwrap();
        assert_eq!((c.d0(), c.d1()), (3, 3));
        assert_eq!(brute_min_distance(c.g0_t()), 3);
        assert_eq!(brute_min_distance(c.h_tilde_t()), 3);
    }

    #[test]
    fn m5_families() {
        for (k, l) in [(16, 5), (11, 10), (6, 10), (26, 5), (21, 10), (16, 15), (11, 20), (6, 25)] {
            let c = build_pbch(5, k, l).unwrap();
            c.verify_invariants().unwrap();
        }
        // l = 10 is not nested in r = 20
        assert!(matches!(build_pbch(5, 1, 10), Err(Error::Construction(_))));
    }

    #[test]
    fn degenerate_layers() {
        let c = build_pbch(4, 11, 0).unwrap();
        assert_eq!((c.d0(), c.d1(), c.shape.d0e(), c.t0()), (0, 3, 1, 0));
        let c = build_pbch(4, 11, 4).unwrap();
        assert_eq!((c.d0(), c.d1(), c.shape.d1e(), c.t1()), (3, 0, 1, 0));
        assert!(c.h_tilde_t().rows() == 0);
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(build_pbch(4, 0, 4), Err(Error::Parameter(_))));
        assert!(matches!(build_pbch(4, 12, 4), Err(Error::Parameter(_))));
        assert!(matches!(build_pbch(4, 3, 12), Err(Error::Parameter(_))));
    }

    #[test]
    fn json_round_trip() {
        let c = build_pbch(5, 16, 5).unwrap();
        let s = c.to_json().unwrap();
        let back = PartitionedCode::from_json(&s).unwrap();
        assert_eq!(back.g1(), c.g1());
        assert_eq!(back.g1_tilde(), c.g1_tilde());
        let mut doc = c.to_document();
        doc.g1[0] = "0".into();
        assert!(PartitionedCode::from_document(&doc).is_err());
    }

    #[test]
    fn hex_rows() {
        let v = BitVec::parse("1000000000000000000000000000000000000000000000000000000000000000011").unwrap();
        let s = row_to_hex(&v);
        assert_eq!(s, "60000000000000001");
        assert_eq!(row_from_hex(&s, v.len()).unwrap(), v);
        assert!(row_from_hex("ff", 4).is_err());
    }

    #[test]
    fn candidates_for_n31() {
        let c = candidate_shapes(5, 16).unwrap();
        let ls: Vec<usize> = c.iter().map(|s| s.l).collect();
        assert_eq!(ls, vec![0, 5, 10, 15]);
        assert_eq!((c[1].d0, c[1].d1), (3, 5));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn small_defect_sets_have_full_rank(seed: u64, which in 0usize..3) {
            let (k, l) = [(16, 5), (11, 10), (6, 10)][which];
            let code = build_pbch(5, k, l).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for u in 1..code.d0() {
                let mut idx = sample(&mut rng, code.n(), u).into_vec();
                idx.sort_unstable();
                prop_assert_eq!(code.g0().select_rows(&idx).unwrap().rank(), u);
            }
        }
    }
}
