//! Oblivious table lookup with a characteristic selector vector.

use crate::circuit::{ConstraintSystem, Domain, Wire};
use crate::field::FieldElement;

use super::bits::assert_boolean;
use super::GadgetError;

/// Prover-supplied 0/1 vector of length `n` with a single one at the
/// 1-based position `t`; each entry is boolean-asserted and the sum is
/// asserted to be one. `entries` overrides the honest vector.
pub fn characteristic_vector(
    cs: &mut ConstraintSystem,
    t: Option<usize>,
    n: usize,
    entries: Option<&[FieldElement]>,
) -> Result<Vec<Wire>, GadgetError> {
    let mut sel = Vec::with_capacity(n);
    for i in 0..n {
        let value = match entries {
            Some(e) => e.get(i).copied(),
            None => t.map(|t| FieldElement::from(t == i + 1)),
        };
        let x = cs.input(value, Domain::ProverOnly)?;
        assert_boolean(cs, x)?;
        sel.push(x);
    }
    let total = cs.sum(&sel)?;
    let one = cs.constant(FieldElement::ONE);
    cs.assert_eq(total, one)?;
    Ok(sel)
}

/// Scalar product `sum_i sel_i * column_i`.
pub fn select(cs: &mut ConstraintSystem, sel: &[Wire], column: &[Wire]) -> Result<Wire, GadgetError> {
    let mut prods = Vec::with_capacity(sel.len());
    for (&x, &c) in sel.iter().zip(column) {
        prods.push(cs.mul(x, c)?);
    }
    Ok(cs.sum(&prods)?)
}

/// Selects row `t` (1-based) of `rows` with a fresh selector vector.
pub fn lookup(cs: &mut ConstraintSystem, t: usize, rows: &[Vec<Wire>]) -> Result<Vec<Wire>, GadgetError> {
    let sel = characteristic_vector(cs, Some(t), rows.len(), None)?;
    lookup_with_selector(cs, &sel, rows)
}

/// Selects every column of `rows` with an existing selector, so all
/// columns are guaranteed to come from the same row.
pub fn lookup_with_selector(
    cs: &mut ConstraintSystem,
    sel: &[Wire],
    rows: &[Vec<Wire>],
) -> Result<Vec<Wire>, GadgetError> {
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) || rows.len() != sel.len() {
        return Err(GadgetError::RaggedTable);
    }
    (0..width)
        .map(|k| {
            let column: Vec<Wire> = rows.iter().map(|r| r[k]).collect();
            select(cs, sel, &column)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(cs: &mut ConstraintSystem, rows: &[[u64; 3]]) -> Vec<Vec<Wire>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| cs.wire_input(cs.field().from_u64(v), Domain::Shared).unwrap()).collect())
            .collect()
    }

    fn values(cs: &ConstraintSystem, ws: &[Wire]) -> Vec<u128> {
        ws.iter().map(|&w| cs.hint(w).unwrap().value()).collect()
    }

    #[test]
    fn examples() {
        let rows = [[1, 2, 3], [4, 5, 6], [7, 8, 9]];
        for (t, want) in [(2, vec![4, 5, 6]), (1, vec![1, 2, 3]), (3, vec![7, 8, 9])] {
            let mut cs = ConstraintSystem::new(Field::default());
            let tab = table(&mut cs, &rows);
            let out = lookup(&mut cs, t, &tab).unwrap();
            assert_eq!(values(&cs, &out), want);
            assert!(cs.evaluate_and_check().unwrap().satisfied);
        }
    }

    #[test]
    fn malformed_selectors_unsatisfiable() {
        let rows = [[1, 2, 3], [4, 5, 6], [7, 8, 9]];
        let f = Field::default();
        let cases: [&[u128]; 4] = [&[1, 1, 0], &[0, 0, 0], &[2, 0, 0], &[0, 2, f.modulus() - 1]];
        for entries in cases {
            let mut cs = ConstraintSystem::new(f);
            let tab = table(&mut cs, &rows);
            let e: Vec<_> = entries.iter().map(|&v| f.elem(v)).collect();
            let sel = characteristic_vector(&mut cs, None, 3, Some(&e)).unwrap();
            lookup_with_selector(&mut cs, &sel, &tab).unwrap();
            assert!(!cs.evaluate_and_check().unwrap().satisfied, "{entries:?}");
        }
        // Out-of-range index: no one anywhere.
        let mut cs = ConstraintSystem::new(f);
        let tab = table(&mut cs, &rows);
        lookup(&mut cs, 4, &tab).unwrap();
        assert!(!cs.evaluate_and_check().unwrap().satisfied);
    }

    #[test]
    fn exhaustive_random_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..12 {
            let rows: Vec<[u64; 3]> = (0..n).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
            for t in 1..=n {
                let mut cs = ConstraintSystem::new(Field::default());
                let tab = table(&mut cs, &rows);
                let out = lookup(&mut cs, t, &tab).unwrap();
                let want: Vec<u128> = rows[t - 1].iter().map(|&v| v as u128).collect();
                assert_eq!(values(&cs, &out), want);
                assert!(cs.evaluate_and_check().unwrap().satisfied);
            }
        }
    }
}
