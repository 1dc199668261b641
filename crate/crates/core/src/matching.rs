//! Exact maximum-weight matchings that saturate one side.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Best total weight of a matching saturating every row (`rows <= cols`),
/// with the row -> column assignment. Hungarian algorithm with potentials on
/// negated weights.
fn hungarian(weights: &[Vec<Rational>], rows: &[usize], cols: &[usize]) -> (Rational, Vec<usize>) {
    let r = rows.len();
    let c = cols.len();
    if r == 0 {
        return (Rational::zero(), Vec::new());
    }
    let cost = |i: usize, j: usize| -> Rational { -weights[rows[i - 1]][cols[j - 1]].clone() };
    let inf: Rational = rows
        .iter()
        .flat_map(|&i| cols.iter().map(move |&j| weights[i][j].abs()))
        .sum::<Rational>()
        * Rational::from_integer(2.into())
        + Rational::from_integer(1.into());
    let mut u = vec![Rational::zero(); r + 1];
    let mut v = vec![Rational::zero(); c + 1];
    let mut p = vec![0usize; c + 1];
    let mut way = vec![0usize; c + 1];
    for i in 1..=r {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf.clone(); c + 1];
        let mut used = vec![false; c + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf.clone();
            let mut j1 = 0;
            for j in 1..=c {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - &u[i0] - &v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j].clone();
                    j1 = j;
                }
            }
            for j in 0..=c {
                if used[j] {
                    u[p[j]] += &delta;
                    v[j] -= &delta;
                } else {
                    minv[j] -= &delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![usize::MAX; r];
    for j in 1..=c {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    let total = (0..r).map(|i| weights[rows[i]][cols[assignment[i]]].clone()).sum();
    (total, assignment)
}

/// Maximum-weight matching saturating all agents.
///
/// `weights[a][c]` is the weight of pairing `agents[a]` with `items[c]`.
/// Among optimal matchings, returns the one whose item vector (positions, in
/// agent order) is lexicographically smallest. Output pairs are
/// `(agent, item)` in the order of `agents`.
pub fn max_weight_perfect_matching(
    agents: &[usize],
    items: &[usize],
    weights: &[Vec<Rational>],
) -> Result<Vec<(usize, usize)>> {
    if items.len() < agents.len() {
        return Err(Error::NotEnoughItems { agents: agents.len(), items: items.len() });
    }
    if weights.len() != agents.len() || weights.iter().any(|row| row.len() != items.len()) {
        return Err(Error::Precondition("weight matrix must be agents x items".into()));
    }
    let all_rows: Vec<usize> = (0..agents.len()).collect();
    let all_cols: Vec<usize> = (0..items.len()).collect();
    let (best, _) = hungarian(weights, &all_rows, &all_cols);

    let mut free: Vec<usize> = all_cols;
    let mut fixed_total = Rational::zero();
    let mut pairs = Vec::with_capacity(agents.len());
    for row in 0..agents.len() {
        let rest: Vec<usize> = (row + 1..agents.len()).collect();
        let pick = free
            .iter()
            .position(|&col| {
                let cols: Vec<usize> = free.iter().copied().filter(|&c| c != col).collect();
                let (sub, _) = hungarian(weights, &rest, &cols);
                &fixed_total + &weights[row][col] + sub == best
            })
            .ok_or_else(|| Error::Invariant("no optimal completion while fixing matching".into()))?;
        let col = free.remove(pick);
        fixed_total += &weights[row][col];
        pairs.push((agents[row], items[col]));
    }
    Ok(pairs)
}

/// Total weight of the optimal matching (no tie-breaking work).
pub fn max_weight_value(weights: &[Vec<Rational>]) -> Result<Rational> {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    if cols < rows {
        return Err(Error::NotEnoughItems { agents: rows, items: cols });
    }
    let r: Vec<usize> = (0..rows).collect();
    let c: Vec<usize> = (0..cols).collect();
    Ok(hungarian(weights, &r, &c).0)
}
