//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls the engine's linear algebra or word
//! operators; elements are plain maps from letter sequences to rationals and
//! ranks come from a dense elimination written for this file.
#![allow(dead_code)]

use infty_core::Rational;
use num_traits::Zero;
use std::collections::BTreeMap;

pub type Elem = BTreeMap<Vec<u16>, Rational>;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn sign(exp: i64) -> i64 {
    if exp.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

pub fn add_to(acc: &mut Elem, w: Vec<u16>, c: Rational) {
    let e = acc.entry(w).or_insert_with(Rational::zero);
    *e += c;
}

pub fn clean(mut x: Elem) -> Elem {
    x.retain(|_, c| !c.is_zero());
    x
}

/// Rank of a dense matrix given by rows, by fraction elimination.
pub fn dense_rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(rank, p);
        let pivot_row = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && !row[c].is_zero() {
                let f = &row[c] / &pivot_row[c];
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of a family of elements, as rows over the union of their supports.
pub fn elem_rank(xs: &[Elem]) -> usize {
    let mut index: BTreeMap<&Vec<u16>, usize> = BTreeMap::new();
    for x in xs {
        for w in x.keys() {
            let n = index.len();
            index.entry(w).or_insert(n);
        }
    }
    let rows = xs
        .iter()
        .map(|x| {
            let mut r = vec![Rational::zero(); index.len()];
            for (w, c) in x {
                r[index[w]] = c.clone();
            }
            r
        })
        .collect();
    dense_rank(rows)
}

/// Whether two families span the same subspace.
pub fn same_span(a: &[Elem], b: &[Elem]) -> bool {
    let ra = elem_rank(a);
    let rb = elem_rank(b);
    let joint: Vec<Elem> = a.iter().chain(b).cloned().collect();
    ra == rb && elem_rank(&joint) == ra
}

pub fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let (n, m, p) = (a.len(), b.len(), b.first().map_or(0, |r| r.len()));
    let mut out = vec![vec![Rational::zero(); p]; n];
    for i in 0..n {
        for k in 0..m {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..p {
                if !b[k][j].is_zero() {
                    out[i][j] += &a[i][k] * &b[k][j];
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Words over a graded alphabet.

/// All words of a weight over `r` letters, in lexicographic order.
pub fn words(r: usize, n: usize) -> Vec<Vec<u16>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out.into_iter().flat_map(|w| (0..r as u16).map(move |l| [w.clone(), vec![l]].concat())).collect();
    }
    out
}

pub fn degree(degs: &[i64], w: &[u16]) -> i64 {
    w.iter().map(|&l| degs[l as usize]).sum()
}

/// Graded commutator of homogeneous elements.
pub fn bracket(degs: &[i64], a: &Elem, b: &Elem) -> Elem {
    let mut out = Elem::new();
    for (u, cu) in a {
        for (v, cv) in b {
            let c = cu * cv;
            add_to(&mut out, [u.clone(), v.clone()].concat(), c.clone());
            let s = sign(degree(degs, u) * degree(degs, v));
            add_to(&mut out, [v.clone(), u.clone()].concat(), -c * q(s));
        }
    }
    clean(out)
}

/// Left-normed brackets `[..[[x_i1, x_i2], x_i3].., x_in]` over every index
/// sequence; they span the weight-`n` part of the free Lie algebra.
pub fn lie_monomials(degs: &[i64], n: usize) -> Vec<Elem> {
    words(degs.len(), n)
        .into_iter()
        .map(|seq| {
            let mut acc: Elem = [(vec![seq[0]], q(1))].into_iter().collect();
            for &l in &seq[1..] {
                acc = bracket(degs, &acc, &[(vec![l], q(1))].into_iter().collect());
            }
            acc
        })
        .filter(|x| !x.is_empty())
        .collect()
}

fn mobius(mut n: usize) -> i64 {
    let mut out = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            out = -out;
        }
        p += 1;
    }
    if n > 1 {
        out = -out;
    }
    out
}

/// Witt's formula for the weight-`n` part of the free Lie algebra on `r`
/// ungraded generators.
pub fn witt(r: usize, n: usize) -> usize {
    let total: i64 = (1..=n).filter(|d| n % d == 0).map(|d| mobius(d) * (r as i64).pow((n / d) as u32)).sum();
    (total / n as i64) as usize
}

/// `μΔ` on one word: the sum over subsets `S` of `w|_S w|_{S^c}`, signed by
/// the Koszul rule for every pair that changes order.
pub fn shuffle_oracle(degs: &[i64], w: &[u16]) -> Elem {
    let n = w.len();
    let mut out = Elem::new();
    for mask in 0u32..(1 << n) {
        let inside = |k: usize| mask & (1 << k) != 0;
        let mut exp = 0;
        for i in 0..n {
            for j in i + 1..n {
                if !inside(i) && inside(j) {
                    exp += degs[w[i] as usize] * degs[w[j] as usize];
                }
            }
        }
        let front: Vec<u16> = (0..n).filter(|&k| inside(k)).map(|k| w[k]).collect();
        let back: Vec<u16> = (0..n).filter(|&k| !inside(k)).map(|k| w[k]).collect();
        add_to(&mut out, [front, back].concat(), q(sign(exp)));
    }
    clean(out)
}

/// Words of one weight grouped by sorted letter content.
pub fn content_blocks(r: usize, n: usize) -> BTreeMap<Vec<u16>, Vec<Vec<u16>>> {
    let mut out: BTreeMap<Vec<u16>, Vec<Vec<u16>>> = BTreeMap::new();
    for w in words(r, n) {
        let mut c = w.clone();
        c.sort_unstable();
        out.entry(c).or_default().push(w);
    }
    out
}

/// Matrix of a word operator on a block, columns indexed by `block`.
pub fn block_matrix(block: &[Vec<u16>], op: impl Fn(&[u16]) -> Elem) -> Vec<Vec<Rational>> {
    let pos: BTreeMap<&Vec<u16>, usize> = block.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut m = vec![vec![Rational::zero(); block.len()]; block.len()];
    for (j, w) in block.iter().enumerate() {
        for (v, c) in op(w) {
            m[pos[&v]][j] += c;
        }
    }
    m
}

/// `Π_{i ∈ nodes} (M - 2^i)` is zero.
pub fn annihilated_by(m: &[Vec<Rational>], nodes: impl IntoIterator<Item = u32>) -> bool {
    let n = m.len();
    let mut acc: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| if i == j { q(1) } else { q(0) }).collect()).collect();
    for i in nodes {
        let mut shifted = m.to_vec();
        for (k, row) in shifted.iter_mut().enumerate() {
            row[k] -= q(1 << i);
        }
        acc = mat_mul(&acc, &shifted);
    }
    acc.iter().all(|r| r.iter().all(|c| c.is_zero()))
}

// ---------------------------------------------------------------------------
// Classical Hochschild complex of ℚ[x]/(x²).

/// Product in ℚ[x]/(x²) on the basis `1 = 0`, `x = 1`.
fn dual_number_product(a: usize, b: usize) -> Option<usize> {
    match (a, b) {
        (0, k) | (k, 0) => Some(k),
        _ => None,
    }
}

/// Matrix of `b : A^{⊗(n+1)} → A^{⊗n}`,
/// `b(a₀⊗…⊗aₙ) = Σᵢ (-1)^i a₀⊗…⊗aᵢaᵢ₊₁⊗…⊗aₙ + (-1)^n aₙa₀⊗a₁⊗…⊗aₙ₋₁`,
/// as dense rows.
pub fn hochschild_boundary(n: usize) -> Vec<Vec<Rational>> {
    let src = tuples(n + 1);
    let tgt = tuples(n);
    let pos: BTreeMap<&Vec<usize>, usize> = tgt.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut m = vec![vec![Rational::zero(); src.len()]; tgt.len()];
    for (j, a) in src.iter().enumerate() {
        for i in 0..n {
            if let Some(p) = dual_number_product(a[i], a[i + 1]) {
                let t: Vec<usize> = a[..i].iter().copied().chain([p]).chain(a[i + 2..].iter().copied()).collect();
                m[pos[&t]][j] += q(sign(i as i64));
            }
        }
        if n > 0 {
            if let Some(p) = dual_number_product(a[n], a[0]) {
                let t: Vec<usize> = [p].into_iter().chain(a[1..n].iter().copied()).collect();
                m[pos[&t]][j] += q(sign(n as i64));
            }
        }
    }
    m
}

fn tuples(len: usize) -> Vec<Vec<usize>> {
    words(2, len).into_iter().map(|w| w.into_iter().map(usize::from).collect()).collect()
}

/// `dim HH^n(A, A*) = dim HH_n(A, A)` for `A = ℚ[x]/(x²)`, from the dense
/// bar-type complex `A^{⊗(n+1)}`.
pub fn classical_hh_dims(max_n: usize) -> Vec<usize> {
    (0..=max_n)
        .map(|n| {
            let dim = 1usize << (n + 1);
            let rank_out = if n == 0 { 0 } else { dense_rank(hochschild_boundary(n)) };
            let rank_in = dense_rank(hochschild_boundary(n + 1));
            dim - rank_out - rank_in
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Derivations of the free algebra, for the brute-force C∞ search.

/// Applies the odd derivation with the given generator values to a word:
/// `m(w) = Σ_k (-1)^{|w_<k|} w_<k m(w_k) w_>k`.
pub fn odd_derivation(degs: &[i64], values: &[Elem], w: &[u16]) -> Elem {
    let mut out = Elem::new();
    let mut prefix_deg = 0;
    for k in 0..w.len() {
        for (v, c) in &values[w[k] as usize] {
            let word = [&w[..k], v.as_slice(), &w[k + 1..]].concat();
            add_to(&mut out, word, c * q(sign(prefix_deg)));
        }
        prefix_deg += degs[w[k] as usize];
    }
    clean(out)
}

pub fn apply_odd(degs: &[i64], values: &[Elem], x: &Elem) -> Elem {
    let mut out = Elem::new();
    for (w, c) in x {
        for (v, cv) in odd_derivation(degs, values, w) {
            add_to(&mut out, v, c * cv);
        }
    }
    clean(out)
}

/// Values of the family `m(a) = α aa`, `m(b) = β[a,b]`,
/// `m(c) = γ[a,c] + δ[a,[a,b]]` on letters `a, b, c` of degrees 1, 2, 3.
pub fn nonstrict_values(alpha: i64, beta: i64, gamma: i64, delta: i64) -> (Vec<i64>, Vec<Elem>) {
    let degs = vec![1, 2, 3];
    let letter = |l: u16| -> Elem { [(vec![l], q(1))].into_iter().collect() };
    let scale = |x: Elem, k: i64| -> Elem { x.into_iter().map(|(w, c)| (w, c * q(k))).collect() };
    let (a, b, c) = (letter(0), letter(1), letter(2));
    let ma = scale([(vec![0, 0], q(1))].into_iter().collect(), alpha);
    let mb = scale(bracket(&degs, &a, &b), beta);
    let mut mc = scale(bracket(&degs, &a, &c), gamma);
    for (w, k) in scale(bracket(&degs, &a, &bracket(&degs, &a, &b)), delta) {
        add_to(&mut mc, w, k);
    }
    (degs, vec![ma, mb, clean(mc)])
}

/// First `(α, β, γ, δ)` with every entry in `1, -1, 2, -2` (in that order,
/// `α` varying slowest) for which the derivation squares to zero.
pub fn first_square_zero_nonstrict() -> Option<[i64; 4]> {
    let range = [1, -1, 2, -2];
    for &a in &range {
        for &b in &range {
            for &c in &range {
                for &d in &range {
                    let (degs, values) = nonstrict_values(a, b, c, d);
                    if values.iter().all(|v| apply_odd(&degs, &values, v).is_empty()) {
                        return Some([a, b, c, d]);
                    }
                }
            }
        }
    }
    None
}
