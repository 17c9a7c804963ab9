//! Random effectful programs over `accum` and `ask`.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const MAX_LOOP: usize = 4;
pub const MAX_NESTING: usize = 3;

/// A reader with the default traverse clause.
pub const RUN_ASK: &str = "runAsk = \\v.\\f. handle { ask |-> \\s.\\x.\\k. k s s } v (f ())\n";

#[derive(Clone)]
struct Ctx {
    vars: Vec<String>,
    accum: bool,
    ask: bool,
    loops: usize,
}

struct Gen {
    rng: StdRng,
    fresh: usize,
}

impl Gen {
    fn name(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("{base}{}", self.fresh)
    }

    /// An int-valued expression.
    fn int(&mut self, ctx: &Ctx, fuel: usize) -> String {
        let leaf = fuel == 0 || self.rng.gen_bool(0.25);
        if leaf {
            return match self.rng.gen_range(0..3) {
                0 if !ctx.vars.is_empty() => {
                    ctx.vars[self.rng.gen_range(0..ctx.vars.len())].clone()
                }
                1 if ctx.ask => "perform ask ()".into(),
                _ => self.rng.gen_range(0..10).to_string(),
            };
        }
        let f = fuel - 1;
        match self.rng.gen_range(0..9) {
            0 | 1 if ctx.accum => {
                let v = self.int(ctx, f);
                let rest = self.int(ctx, f);
                format!("(perform accum ({v}); {rest})")
            }
            2 | 3 if ctx.loops < MAX_NESTING => {
                let n = self.rng.gen_range(1..=MAX_LOOP);
                let i = self.name("i");
                let t = self.name("t");
                let mut inner = ctx.clone();
                inner.vars.push(i.clone());
                inner.loops += 1;
                let body = self.int(&inner, f);
                match self.rng.gen_range(0..3) {
                    0 => format!("({t} <- for {i}:{n}. ({body}); reduce (+) {t})"),
                    1 => format!(
                        "({t} <- for {i}:{n}. ({body}); {t} {})",
                        self.rng.gen_range(0..n)
                    ),
                    _ => format!("({t} <- for {i}:{n}. ({body}); length {t})"),
                }
            }
            4 => {
                let y = self.name("y");
                let a = self.int(ctx, f);
                let mut inner = ctx.clone();
                inner.vars.push(y.clone());
                let b = self.int(&inner, f);
                format!("({y} <- {a}; {b})")
            }
            5 => {
                let v = self.int(ctx, f);
                let mut inner = ctx.clone();
                inner.ask = true;
                let body = self.int(&inner, f);
                format!("(runAsk ({v}) (\\_. {body}))")
            }
            6 => {
                let (r, s) = (self.name("r"), self.name("s"));
                let mut inner = ctx.clone();
                inner.accum = true;
                let body = self.int(&inner, f);
                format!("(({r}, {s}) <- runAccum (+) 0 (\\_. {body}); {r} + {s})")
            }
            7 => {
                let (a, b, c, d) = (
                    self.int(ctx, f),
                    self.int(ctx, f),
                    self.int(ctx, f),
                    self.int(ctx, f),
                );
                format!("(if ({a}) < ({b}) then ({c}) else ({d}))")
            }
            _ => {
                let (a, b) = (self.int(ctx, f), self.int(ctx, f));
                format!("(({a}) + ({b}))")
            }
        }
    }
}

/// `count` closed programs printing an `(int, int)` pair.
pub fn programs(seed: u64, count: usize) -> Vec<String> {
    programs_with(seed, count, |body| body.to_string())
}

/// As [`programs`], with each generated body passed through `wrap`.
pub fn programs_with(seed: u64, count: usize, wrap: impl Fn(&str) -> String) -> Vec<String> {
    let mut g = Gen {
        rng: StdRng::seed_from_u64(seed),
        fresh: 0,
    };
    let top = Ctx {
        vars: Vec::new(),
        accum: true,
        ask: true,
        loops: 0,
    };
    (0..count)
        .map(|k| {
            let fuel = 2 + k % 4;
            let body = wrap(&g.int(&top, fuel));
            let ask = g.rng.gen_range(0..10);
            let main = if k % 2 == 0 {
                format!("runAsk {ask} (\\_. runAccum (+) 0 (\\_. {body}))")
            } else {
                format!("(a, b) <- runAccum (+) 0 (\\_. runAsk {ask} (\\_. {body}));\n  (a, b)")
            };
            format!("{RUN_ASK}\nmain =\n  {main}\n")
        })
        .collect()
}

/// Programs accumulating a random int table through nested loops, with the
/// expected sum.
pub fn accum_sums(seed: u64, count: usize) -> Vec<(String, i64)> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let outer = rng.gen_range(0..=MAX_LOOP);
            let inner = rng.gen_range(1..=MAX_LOOP);
            let xs: Vec<i64> = (0..outer * inner)
                .map(|_| rng.gen_range(-1000..1000))
                .collect();
            let pre: i64 = rng.gen_range(-50..50);
            let table = xs
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ");
            let src = format!(
                "xs = [{table}]\n\
                 (_, total) = runAccum (+) 0 (\\_.\n  \
                   perform accum ({pre});\n  \
                   for i:{outer}. for j:{inner}. perform accum (xs (i * {inner} + j)))\n\
                 total\n"
            );
            let expected = xs.iter().fold(pre, |acc, x| acc + x);
            (src, expected)
        })
        .collect()
}
