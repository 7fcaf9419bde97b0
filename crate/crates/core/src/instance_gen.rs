//! Random instances and (input, target) schedule-pair datasets.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{evaluate, is_optimal, row_hard_violations, Instance, Schedule, ShiftCode};
use crate::model::{HOURS_PER_SHIFT, NUM_SHIFTS};

/// Reference horizon the hour bounds are defined for.
const REFERENCE_DAYS: u32 = 7;
const REFERENCE_MIN_HOURS: u32 = 32;
const REFERENCE_MAX_HOURS: u32 = 48;

/// Random instance with the reference parameter set; hour bounds scale with the horizon.
pub fn gen_instance(employees: usize, days: usize, seed: u64) -> Instance {
    assert!(
        employees >= 1 && days >= 1,
        "instance needs employees and days"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = days as u32;
    let horizon = HOURS_PER_SHIFT * d;
    let max_hours = (REFERENCE_MAX_HOURS * d / REFERENCE_DAYS).min(horizon);
    let min_hours = (REFERENCE_MIN_HOURS * d / REFERENCE_DAYS).min(max_hours);
    let target = (employees / NUM_SHIFTS) as u32;
    let pref_off = (0..employees)
        .map(|_| (0..days).map(|_| rng.gen_range(0..=1u8)).collect())
        .collect();
    Instance {
        num_employees: employees,
        num_days: days,
        num_shifts: NUM_SHIFTS,
        hours_per_shift: HOURS_PER_SHIFT,
        min_hours,
        max_hours,
        max_consecutive: 5,
        min_rest: 2,
        understaff_weight: 100,
        overstaff_weight: 1,
        coverage: vec![vec![target; NUM_SHIFTS]; days],
        pref_off,
        reference_min_soft: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    UnfeasibleToFeasible,
    FeasibleToOptimal,
}

/// One training pair; input and target belong to the same instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub instance_id: String,
    pub kind: RecordKind,
    pub input: Schedule,
    pub target: Schedule,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub valid_frac: f64,
    pub test_frac: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_frac: 0.8,
            valid_frac: 0.1,
            test_frac: 0.1,
        }
    }
}

impl SplitSpec {
    pub fn new(train_frac: f64, valid_frac: f64, test_frac: f64) -> Result<Self> {
        let s = SplitSpec {
            train_frac,
            valid_frac,
            test_frac,
        };
        let fracs = [train_frac, valid_frac, test_frac];
        if fracs.iter().any(|f| !(0.0..=1.0).contains(f))
            || (fracs.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::Configuration(format!(
                "split fractions {fracs:?} must sum to 1"
            )));
        }
        Ok(s)
    }

    /// Parses `"0.8,0.1,0.1"`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<f64> = text
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Configuration(format!("bad split {text:?}: {e}")))?;
        match parts.as_slice() {
            [a, b, c] => SplitSpec::new(*a, *b, *c),
            _ => Err(Error::Configuration(format!(
                "split {text:?} needs three fractions"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetSplits {
    pub train: Vec<DatasetRecord>,
    pub valid: Vec<DatasetRecord>,
    pub test: Vec<DatasetRecord>,
}

impl DatasetSplits {
    pub fn len(&self) -> usize {
        self.train.len() + self.valid.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &DatasetRecord> {
        self.train.iter().chain(&self.valid).chain(&self.test)
    }
}

fn random_cell<R: Rng>(rng: &mut R, s: &Schedule) -> (usize, usize) {
    (rng.gen_range(0..s.employees()), rng.gen_range(0..s.days()))
}

/// Distinct feasible variants of `optimal`, each reached through feasible single-cell changes.
pub fn perturb_feasible(
    optimal: &Schedule,
    instance: &Instance,
    count: usize,
    seed: u64,
) -> Result<Vec<Schedule>> {
    instance.check_schedule(optimal)?;
    if evaluate(optimal, instance)?.hard_total != 0 {
        return Err(Error::InvalidInput(
            "perturbation source must be feasible".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<Schedule> = HashSet::new();
    seen.insert(optimal.clone());
    let mut out = Vec::with_capacity(count);
    let max_changes = 3 * instance.num_days;
    let mut attempts = 0usize;

    while out.len() < count {
        if attempts >= 1000 * count {
            return Err(Error::GenerationExhausted(format!(
                "only {} of {count} distinct feasible variants after {attempts} attempts",
                out.len()
            )));
        }
        attempts += 1;
        let wanted = rng.gen_range(1..=max_changes);
        let mut candidate = optimal.clone();
        let mut accepted = 0;
        for _ in 0..wanted * 50 {
            if accepted == wanted {
                break;
            }
            let (e, d) = random_cell(&mut rng, &candidate);
            let old = candidate.get(e, d);
            candidate.set(e, d, old.random_other(&mut rng));
            if row_hard_violations(candidate.row(e), instance) == 0 {
                accepted += 1;
            } else {
                candidate.set(e, d, old);
            }
        }
        if accepted > 0 && seen.insert(candidate.clone()) {
            out.push(candidate);
        }
    }
    Ok(out)
}

/// Random cell mutations, all kept, until the schedule breaks a hard constraint.
pub fn make_unfeasible(feasible: &Schedule, instance: &Instance, seed: u64) -> Result<Schedule> {
    Ok(make_unfeasible_counted(feasible, instance, seed)?.0)
}

/// As [`make_unfeasible`], also returning the number of mutations applied.
pub fn make_unfeasible_counted(
    feasible: &Schedule,
    instance: &Instance,
    seed: u64,
) -> Result<(Schedule, usize)> {
    if evaluate(feasible, instance)?.hard_total != 0 {
        return Err(Error::InvalidInput(
            "make_unfeasible expects a feasible schedule".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = feasible.clone();
    for applied in 1..=100 {
        let (e, d) = random_cell(&mut rng, &s);
        let old = s.get(e, d);
        s.set(e, d, old.random_other(&mut rng));
        if row_hard_violations(s.row(e), instance) > 0 {
            return Ok((s, applied));
        }
    }
    Err(Error::GenerationExhausted(
        "still feasible after 100 mutations".into(),
    ))
}

/// Instance identifier, instance and a certified optimal schedule.
pub type SolvedInstance = (String, Instance, Schedule);

/// Builds unfeasible→feasible and feasible→optimal pairs and splits them.
pub fn build_dataset(
    instances: &[SolvedInstance],
    per_optimal: usize,
    seed: u64,
    split: SplitSpec,
) -> Result<DatasetSplits> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(instances.len() * per_optimal * 2);
    for (id, instance, optimal) in instances {
        if !is_optimal(optimal, instance)? {
            return Err(Error::InvalidInput(format!(
                "schedule for {id} is not optimal"
            )));
        }
        let feasible = perturb_feasible(optimal, instance, per_optimal, rng.gen())?;
        for f in feasible {
            let broken = make_unfeasible(&f, instance, rng.gen())?;
            records.push(DatasetRecord {
                instance_id: id.clone(),
                kind: RecordKind::UnfeasibleToFeasible,
                input: broken,
                target: f.clone(),
            });
            records.push(DatasetRecord {
                instance_id: id.clone(),
                kind: RecordKind::FeasibleToOptimal,
                input: f,
                target: optimal.clone(),
            });
        }
    }
    records.shuffle(&mut rng);
    let n = records.len();
    let n_train = (split.train_frac * n as f64).floor() as usize;
    let n_valid = ((split.valid_frac * n as f64).floor() as usize).min(n - n_train);
    let test = records.split_off(n_train + n_valid);
    let valid = records.split_off(n_train);
    Ok(DatasetSplits {
        train: records,
        valid,
        test,
    })
}

/// Writes one JSON object per line.
pub fn write_records(path: &Path, records: &[DatasetRecord]) -> Result<()> {
    crate::io::ensure_parent(path)?;
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r)?;
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<DatasetRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub per_optimal: usize,
    pub split: SplitSpec,
    /// `(instance_id, instance file)` pairs.
    pub instances: Vec<(String, String)>,
    /// `(split name, records file, record count)`.
    pub files: Vec<(String, String, usize)>,
}

/// Writes `train.jsonl`, `valid.jsonl`, `test.jsonl` and `manifest.json` into `dir`.
pub fn write_dataset(
    dir: &Path,
    splits: &DatasetSplits,
    instance_files: Vec<(String, String)>,
    seed: u64,
    per_optimal: usize,
    split: SplitSpec,
) -> Result<DatasetManifest> {
    let mut files = Vec::new();
    for (name, recs) in [
        ("train", &splits.train),
        ("valid", &splits.valid),
        ("test", &splits.test),
    ] {
        let file = format!("{name}.jsonl");
        write_records(&dir.join(&file), recs)?;
        files.push((name.to_string(), file, recs.len()));
    }
    let manifest = DatasetManifest {
        seed,
        per_optimal,
        split,
        instances: instance_files,
        files,
    };
    crate::io::write_json(dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Convenience for tests and tools: the all-`code` schedule for an instance.
pub fn uniform_schedule(instance: &Instance, code: ShiftCode) -> Schedule {
    Schedule::new(instance.num_employees, instance.num_days, code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_size_parameters() {
        let inst = gen_instance(100, 7, 9);
        assert_eq!((inst.min_hours, inst.max_hours), (32, 48));
        assert_eq!((inst.max_consecutive, inst.min_rest), (5, 2));
        assert_eq!((inst.understaff_weight, inst.overstaff_weight), (100, 1));
        assert!(inst.coverage.iter().flatten().all(|&u| u == 33));
        inst.validate().unwrap();
    }

    #[test]
    fn small_sizes_scale_hours() {
        let inst = gen_instance(3, 7, 0);
        assert!(inst.coverage.iter().flatten().all(|&u| u == 1));
        let inst = gen_instance(4, 5, 0);
        assert_eq!((inst.min_hours, inst.max_hours), (22, 34));
        let inst = gen_instance(2, 1, 0);
        assert_eq!((inst.min_hours, inst.max_hours), (4, 6));
        inst.validate().unwrap();
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(gen_instance(100, 7, 42), gen_instance(100, 7, 42));
        assert_ne!(
            gen_instance(100, 7, 42).pref_off,
            gen_instance(100, 7, 43).pref_off
        );
    }

    #[test]
    fn split_parsing() {
        assert_eq!(
            SplitSpec::parse("0.8,0.1,0.1").unwrap(),
            SplitSpec::default()
        );
        assert!(SplitSpec::parse("0.8,0.3,0.1").is_err());
        assert!(SplitSpec::parse("1").is_err());
    }
}
