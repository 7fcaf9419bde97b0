use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// One cell of a roster: rest or one of the three working shifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[repr(u8)]
pub enum ShiftCode {
    #[default]
    Rest = 0,
    Morning = 1,
    Afternoon = 2,
    Night = 3,
}

impl ShiftCode {
    pub const ALL: [ShiftCode; 4] = [
        ShiftCode::Rest,
        ShiftCode::Morning,
        ShiftCode::Afternoon,
        ShiftCode::Night,
    ];

    #[inline]
    pub fn is_work(self) -> bool {
        self != ShiftCode::Rest
    }

    #[inline]
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    /// Zero-based index into the working-shift axis; `None` for rest.
    #[inline]
    pub fn shift_index(self) -> Option<usize> {
        match self {
            ShiftCode::Rest => None,
            s => Some(s as usize - 1),
        }
    }

    pub fn from_shift_index(s: usize) -> ShiftCode {
        ShiftCode::ALL[s + 1]
    }

    /// Uniform draw over the four codes.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> ShiftCode {
        ShiftCode::ALL[rng.gen_range(0..4)]
    }

    /// Uniform draw over the three codes different from `self`.
    pub fn random_other<R: Rng + ?Sized>(self, rng: &mut R) -> ShiftCode {
        let k = rng.gen_range(0..3u8);
        let v = if k >= self.as_u8() { k + 1 } else { k };
        ShiftCode::ALL[v as usize]
    }
}

impl TryFrom<u8> for ShiftCode {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        ShiftCode::ALL
            .get(v as usize)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("shift code {v} outside 0..=3")))
    }
}

/// An employees × days matrix of shift codes; the GA chromosome.
///
/// One code per cell makes "at most one shift per day" hold by construction.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Schedule {
    employees: usize,
    days: usize,
    cells: Vec<ShiftCode>,
}

impl Schedule {
    pub fn new(employees: usize, days: usize, fill: ShiftCode) -> Self {
        Schedule {
            employees,
            days,
            cells: vec![fill; employees * days],
        }
    }

    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let employees = rows.len();
        let days = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut cells = Vec::with_capacity(employees * days);
        for (e, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != days {
                return Err(Error::InvalidInput(format!(
                    "row {e} has {} days, expected {days}",
                    row.len()
                )));
            }
            for &v in row {
                cells.push(ShiftCode::try_from(v)?);
            }
        }
        Ok(Schedule {
            employees,
            days,
            cells,
        })
    }

    pub fn random<R: Rng + ?Sized>(employees: usize, days: usize, rng: &mut R) -> Self {
        let cells = (0..employees * days)
            .map(|_| ShiftCode::random(rng))
            .collect();
        Schedule {
            employees,
            days,
            cells,
        }
    }

    #[inline]
    pub fn employees(&self) -> usize {
        self.employees
    }

    #[inline]
    pub fn days(&self) -> usize {
        self.days
    }

    #[inline]
    pub fn get(&self, e: usize, d: usize) -> ShiftCode {
        self.cells[e * self.days + d]
    }

    #[inline]
    pub fn set(&mut self, e: usize, d: usize, code: ShiftCode) {
        self.cells[e * self.days + d] = code;
    }

    #[inline]
    pub fn works(&self, e: usize, d: usize) -> bool {
        self.get(e, d).is_work()
    }

    pub fn row(&self, e: usize) -> &[ShiftCode] {
        &self.cells[e * self.days..(e + 1) * self.days]
    }

    pub fn row_mut(&mut self, e: usize) -> &mut [ShiftCode] {
        &mut self.cells[e * self.days..(e + 1) * self.days]
    }

    /// Cells in row-major order.
    pub fn cells(&self) -> &[ShiftCode] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [ShiftCode] {
        &mut self.cells
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.employees)
            .map(|e| self.row(e).iter().map(|c| c.as_u8()).collect())
            .collect()
    }

    /// Number of positions whose codes differ.
    pub fn hamming(&self, other: &Schedule) -> usize {
        debug_assert_eq!(self.cells.len(), other.cells.len());
        self.cells
            .iter()
            .zip(&other.cells)
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn same_shape(&self, other: &Schedule) -> bool {
        self.employees == other.employees && self.days == other.days
    }
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Schedule {}x{}", self.employees, self.days)?;
        for e in 0..self.employees {
            let row: String = self
                .row(e)
                .iter()
                .map(|c| char::from(b'0' + c.as_u8()))
                .collect();
            writeln!(f, "  {row}")?;
        }
        Ok(())
    }
}

impl Serialize for Schedule {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Schedule {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<u8>>::deserialize(deserializer)?;
        Schedule::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
