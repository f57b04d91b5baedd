//! Two-counter (Minsky) machines and the committed machine table.
//!
//! Table format, one machine per line, `#` starts a comment:
//!
//! ```text
//! <index>: <instr>; <instr>; ...
//! instr := INC <r> <next> | DEC <r> <if_nonzero> <if_zero> | HALT
//! ```
//!
//! Registers are `0` or `1`, targets index into the same machine, and
//! execution starts at instruction 0 with both counters zero.

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::CounterRng;

/// The committed table, embedded at build time.
pub const COMMITTED_TABLE: &str = include_str!("../../data/two_counter_machines.txt");

/// Parameters used to generate [`COMMITTED_TABLE`].
pub const TABLE_SEED: u64 = 0x5EC7_2C0D_E000_0001;
pub const TABLE_SIZE: usize = 10240;
pub const TABLE_MAX_LEN: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instr {
    Inc { reg: u8, next: u16 },
    Dec { reg: u8, nonzero: u16, zero: u16 },
    Halt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    pub program: Vec<Instr>,
}

/// Execution state; `pc == None` once halted.
#[derive(Debug, Clone)]
pub struct Run {
    pc: Option<u16>,
    counters: [u64; 2],
    pub steps: u64,
}

impl Run {
    pub fn new() -> Self {
        Run { pc: Some(0), counters: [0, 0], steps: 0 }
    }

    pub fn halted(&self) -> bool {
        self.pc.is_none()
    }

    /// Executes one instruction; returns whether the machine is halted afterwards.
    pub fn step(&mut self, m: &Machine) -> bool {
        let Some(pc) = self.pc else { return true };
        self.steps += 1;
        self.pc = match m.program[pc as usize] {
            Instr::Halt => None,
            Instr::Inc { reg, next } => {
                self.counters[reg as usize] += 1;
                Some(next)
            }
            Instr::Dec { reg, nonzero, zero } => {
                let c = &mut self.counters[reg as usize];
                if *c > 0 {
                    *c -= 1;
                    Some(nonzero)
                } else {
                    Some(zero)
                }
            }
        };
        self.pc.is_none()
    }
}

impl Default for Run {
    fn default() -> Self {
        Run::new()
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Inc { reg, next } => write!(f, "INC {reg} {next}"),
            Instr::Dec { reg, nonzero, zero } => write!(f, "DEC {reg} {nonzero} {zero}"),
            Instr::Halt => write!(f, "HALT"),
        }
    }
}

impl FromStr for Instr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Instr> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let num =
            |t: &str| -> Result<u16> { t.parse().map_err(|_| Error::Parse(format!("bad operand {t:?} in {s:?}"))) };
        let reg = |t: &str| -> Result<u8> {
            match t {
                "0" => Ok(0),
                "1" => Ok(1),
                _ => Err(Error::Parse(format!("bad register {t:?} in {s:?}"))),
            }
        };
        match toks.as_slice() {
            ["HALT"] => Ok(Instr::Halt),
            ["INC", r, n] => Ok(Instr::Inc { reg: reg(r)?, next: num(n)? }),
            ["DEC", r, a, b] => Ok(Instr::Dec { reg: reg(r)?, nonzero: num(a)?, zero: num(b)? }),
            _ => Err(Error::Parse(format!("unrecognised instruction {s:?}"))),
        }
    }
}

impl fmt::Display for Machine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.program.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl Machine {
    fn validate(&self) -> Result<()> {
        let n = self.program.len();
        if n == 0 {
            return Err(Error::Validation("empty machine".into()));
        }
        let ok = |t: u16| (t as usize) < n;
        for ins in &self.program {
            let good = match *ins {
                Instr::Halt => true,
                Instr::Inc { next, .. } => ok(next),
                Instr::Dec { nonzero, zero, .. } => ok(nonzero) && ok(zero),
            };
            if !good {
                return Err(Error::Validation(format!("jump target out of range in {self}")));
            }
        }
        Ok(())
    }
}

/// Parses a machine table; indices must run `0, 1, 2, ...` in order.
pub fn parse_table(text: &str) -> Result<Vec<Machine>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (idx, body) =
            line.split_once(':').ok_or_else(|| Error::Parse(format!("line {}: missing ':'", lineno + 1)))?;
        let idx: usize = idx.trim().parse().map_err(|_| Error::Parse(format!("line {}: bad index", lineno + 1)))?;
        if idx != out.len() {
            return Err(Error::Parse(format!("line {}: expected index {}, got {idx}", lineno + 1, out.len())));
        }
        let program = body.split(';').map(|s| s.trim().parse()).collect::<Result<Vec<Instr>>>()?;
        let m = Machine { program };
        m.validate()?;
        out.push(m);
    }
    Ok(out)
}

pub fn format_table(machines: &[Machine]) -> String {
    let mut s = String::from("# two-counter machine table\n");
    for (i, m) in machines.iter().enumerate() {
        s.push_str(&format!("{i}: {m}\n"));
    }
    s
}

/// Deterministic pseudo-random machine table.
pub fn generate_table(count: usize, max_len: u64, seed: u64) -> Vec<Machine> {
    let root = CounterRng::new(seed);
    (0..count)
        .map(|i| {
            let mut r = root.split(i as u64);
            let len = 1 + r.below(max_len);
            let program = (0..len)
                .map(|_| match r.below(8) {
                    0 => Instr::Halt,
                    1..=3 => Instr::Inc { reg: r.below(2) as u8, next: r.below(len) as u16 },
                    _ => Instr::Dec { reg: r.below(2) as u8, nonzero: r.below(len) as u16, zero: r.below(len) as u16 },
                })
                .collect();
            Machine { program }
        })
        .collect()
}

pub fn content_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn committed_table_is_reproducible() {
        let regenerated = format_table(&generate_table(TABLE_SIZE, TABLE_MAX_LEN, TABLE_SEED));
        assert_eq!(regenerated, COMMITTED_TABLE);
        assert_eq!(parse_table(COMMITTED_TABLE).unwrap().len(), TABLE_SIZE);
    }

    #[test]
    fn run_semantics() {
        // c0 := 3, then drain it; halts after 3 incs + 4 decs + halt
        let m = parse_table("0: INC 0 1; INC 0 2; INC 0 3; DEC 0 3 4; HALT").unwrap().remove(0);
        let mut run = Run::new();
        while !run.step(&m) {}
        assert_eq!(run.steps, 8);
        let looping = parse_table("0: INC 1 0").unwrap().remove(0);
        let mut run = Run::new();
        assert!((0..1000).all(|_| !run.step(&looping)));
    }

    #[test]
    fn parse_rejects_bad_tables() {
        assert!(parse_table("0: INC 0 5").is_err());
        assert!(parse_table("1: HALT").is_err());
        assert!(parse_table("0: INC 2 0").is_err());
        assert!(parse_table("0: JMP 0").is_err());
    }
}
