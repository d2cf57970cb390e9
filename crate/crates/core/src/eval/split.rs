use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::label::{Label, Split};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitAssignment {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

impl SplitAssignment {
    pub fn split_of(&self, id: &str) -> Split {
        if self.test.iter().any(|x| x == id) {
            Split::Test
        } else if self.val.iter().any(|x| x == id) {
            Split::Val
        } else if self.train.iter().any(|x| x == id) {
            Split::Train
        } else {
            Split::Unsplit
        }
    }
}

/// Splits `total` across classes proportionally to `counts`, largest
/// remainder first; equal remainders go to the lower class index.
fn apportion(total: usize, counts: [usize; 2]) -> [usize; 2] {
    let n: usize = counts.iter().sum();
    let mut out = [0usize; 2];
    let mut remainders = [(0u128, 0usize); 2];
    for c in 0..2 {
        // exact integer arithmetic: quota = total·n_c / n
        let num = total as u128 * counts[c] as u128;
        out[c] = (num / n as u128) as usize;
        remainders[c] = (num % n as u128, c);
    }
    let mut missing = total - out.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, c) in &remainders {
        if missing == 0 {
            break;
        }
        out[c] += 1;
        missing -= 1;
    }
    out
}

fn round_share(n: usize, frac: f64) -> usize {
    (n as f64 * frac).round() as usize
}

/// Stratified train/validation/test partition.
///
/// The test share is taken from the whole set first, then the validation
/// share from what remains; each split size is rounded once over the whole
/// set and distributed over the classes in proportion to their counts.
/// Assignment within a class follows a seeded shuffle. Output lists keep the
/// input order of ids.
pub fn stratified_split(
    items: &[(String, Label)],
    test_frac: f64,
    val_frac_of_remainder: f64,
    seed: u64,
) -> Result<SplitAssignment> {
    if !(test_frac > 0.0 && test_frac < 1.0) {
        return Err(Error::InvalidArgument(format!("test fraction must lie in (0, 1), got {test_frac}")));
    }
    if !(0.0..1.0).contains(&val_frac_of_remainder) {
        return Err(Error::InvalidArgument(format!(
            "validation fraction must lie in [0, 1), got {val_frac_of_remainder}"
        )));
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, (_, label)) in items.iter().enumerate() {
        by_class[label.index()].push(i);
    }
    for label in Label::ALL {
        let n = by_class[label.index()].len();
        if n < 3 {
            return Err(Error::InvalidData(format!(
                "class `{label}` has {n} members; stratified splitting needs at least 3"
            )));
        }
    }

    let counts = [by_class[0].len(), by_class[1].len()];
    let n = items.len();
    let test = apportion(round_share(n, test_frac), counts);
    let rest = [counts[0] - test[0], counts[1] - test[1]];
    let val = apportion(round_share(rest[0] + rest[1], val_frac_of_remainder), rest);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![Split::Train; n];
    for c in 0..2 {
        let mut members = by_class[c].clone();
        members.shuffle(&mut rng);
        for (k, &i) in members.iter().enumerate() {
            assignment[i] = if k < test[c] {
                Split::Test
            } else if k < test[c] + val[c] {
                Split::Val
            } else {
                Split::Train
            };
        }
    }

    let mut out = SplitAssignment::default();
    for ((id, _), split) in items.iter().zip(assignment) {
        match split {
            Split::Train => out.train.push(id.clone()),
            Split::Val => out.val.push(id.clone()),
            Split::Test => out.test.push(id.clone()),
            Split::Unsplit => unreachable!(),
        }
    }
    Ok(out)
}
