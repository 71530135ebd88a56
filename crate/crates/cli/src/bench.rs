use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use fairmpc::mpc::{share, PrimitiveCounts, Session, SessionConfig, SharedValue};
use fairmpc::RingElement;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, HarnessResult, InPhase, Phase};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primitive {
    AddShared,
    MulConst,
    PiMul,
    PiMulInt,
    PiGte,
    PiEq,
    PiDiv,
    PiLn,
    PiGrRandom,
    PiLap,
}

impl Primitive {
    pub const ALL: [Primitive; 10] = [
        Primitive::AddShared,
        Primitive::MulConst,
        Primitive::PiMul,
        Primitive::PiMulInt,
        Primitive::PiGte,
        Primitive::PiEq,
        Primitive::PiDiv,
        Primitive::PiLn,
        Primitive::PiGrRandom,
        Primitive::PiLap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Primitive::AddShared => "add_shared",
            Primitive::MulConst => "mul_const",
            Primitive::PiMul => "pi_mul",
            Primitive::PiMulInt => "pi_mul_int",
            Primitive::PiGte => "pi_gte",
            Primitive::PiEq => "pi_eq",
            Primitive::PiDiv => "pi_div",
            Primitive::PiLn => "pi_ln",
            Primitive::PiGrRandom => "pi_gr_random",
            Primitive::PiLap => "pi_lap",
        }
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Primitive {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Primitive::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let known: Vec<&str> = Primitive::ALL.iter().map(|p| p.name()).collect();
            HarnessError::config(format!("unknown primitive '{s}' (known: {})", known.join(", ")))
        })
    }
}

/// Cost of `size` sequential single-element invocations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub primitive: Primitive,
    pub size: usize,
    pub wall_seconds: f64,
    pub rounds: u64,
    pub bytes: u64,
    pub messages: u64,
    pub counts: PrimitiveCounts,
}

fn shared_fixed(s: &Session, x: f64, rng: &mut ChaCha8Rng) -> HarnessResult<SharedValue> {
    Ok(share(s.codec().encode(x).in_phase(Phase::Bench)?, rng))
}

fn operands(p: Primitive, s: &Session, rng: &mut ChaCha8Rng) -> HarnessResult<(SharedValue, SharedValue)> {
    let (a, b) = match p {
        Primitive::PiMulInt | Primitive::PiEq => {
            let a = rng.gen_range(-1000i64..1000);
            let b = if rng.gen_bool(0.5) { a } else { rng.gen_range(-1000i64..1000) };
            return Ok((share(RingElement(a as u64), rng), share(RingElement(b as u64), rng)));
        }
        Primitive::PiDiv => (rng.gen_range(-100.0..100.0), rng.gen_range(0.01..1000.0)),
        Primitive::PiLn => (rng.gen_range(0.01..1000.0), 0.0),
        _ => (rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0)),
    };
    Ok((shared_fixed(s, a, rng)?, shared_fixed(s, b, rng)?))
}

/// Runs `size` invocations of `primitive` on fresh random operands in a
/// seeded session and reports the traffic they generated.
pub fn bench_mpc(primitive: Primitive, size: usize, seed: u64) -> HarnessResult<BenchRecord> {
    let mut s = Session::new(SessionConfig::seeded(seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs = (0..size).map(|_| operands(primitive, &s, &mut rng)).collect::<HarnessResult<Vec<_>>>()?;
    let before = *s.stats();
    let start = Instant::now();
    for (a, b) in &inputs {
        let out = match primitive {
            Primitive::AddShared => Ok(a.to_vec().add(&b.to_vec()).get(0)),
            Primitive::MulConst => Ok(a.to_vec().mul_const(3).get(0)),
            Primitive::PiMul => s.pi_mul(a, b, true),
            Primitive::PiMulInt => s.pi_mul(a, b, false),
            Primitive::PiGte => s.pi_gte(a, b),
            Primitive::PiEq => s.pi_eq(a, b),
            Primitive::PiDiv => s.pi_div(a, b),
            Primitive::PiLn => s.pi_ln(a),
            Primitive::PiGrRandom => s.pi_gr_random(0.0, 1.0),
            Primitive::PiLap => s.pi_lap(1.0),
        };
        std::hint::black_box(out.in_phase(Phase::Bench)?);
    }
    let wall_seconds = start.elapsed().as_secs_f64();
    let after = *s.stats();
    Ok(BenchRecord {
        primitive,
        size,
        wall_seconds,
        rounds: after.rounds - before.rounds,
        bytes: after.bytes - before.bytes,
        messages: after.messages - before.messages,
        counts: s.counts().clone(),
    })
}
