//! Random generators shared by the integration tests.
#![allow(dead_code)]

use avcdos::channel::{validate_avc, Avc};
use avcdos::rational::{int, rat, RVector, Rational};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A probability vector with small denominators; zeros show up often.
pub fn random_dist(r: &mut impl Rng, n: usize) -> RVector {
    loop {
        let w: Vec<i64> = (0..n)
            .map(|_| {
                if r.gen_bool(0.2) {
                    0
                } else {
                    r.gen_range(0..=6)
                }
            })
            .collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.into_iter().map(|v| rat(v, total)).collect();
        }
    }
}

pub fn random_channel(r: &mut impl Rng, nx: usize, ns: usize, ny: usize) -> Avc {
    let table: Vec<Vec<RVector>> = (0..nx)
        .map(|_| (0..ns).map(|_| random_dist(r, ny)).collect())
        .collect();
    validate_avc(&table).unwrap()
}

pub fn random_dims(r: &mut impl Rng, max: usize) -> (usize, usize, usize) {
    (
        r.gen_range(1..=max),
        r.gen_range(1..=max),
        r.gen_range(1..=max),
    )
}

/// W(·|x,s) = V(·|{x,s}) on a common alphabet, symmetric in (x, s).
pub fn symmetric_channel(r: &mut impl Rng, n: usize, ny: usize) -> Avc {
    let mut v = vec![vec![RVector::new(); n]; n];
    for a in 0..n {
        for b in a..n {
            let d = random_dist(r, ny);
            v[a][b] = d.clone();
            v[b][a] = d;
        }
    }
    validate_avc(&v).unwrap()
}

/// W(·|x,s) = V(·|s) for every x.
pub fn input_independent(r: &mut impl Rng, nx: usize, ns: usize, ny: usize) -> Avc {
    let rows: Vec<RVector> = (0..ns).map(|_| random_dist(r, ny)).collect();
    validate_avc(&vec![rows; nx]).unwrap()
}

/// W(·|x,s) = V(·|x) for every s.
pub fn state_independent(r: &mut impl Rng, nx: usize, ns: usize, ny: usize) -> Avc {
    let table: Vec<Vec<RVector>> = (0..nx)
        .map(|_| {
            let d = random_dist(r, ny);
            vec![d; ns]
        })
        .collect();
    validate_avc(&table).unwrap()
}

pub fn random_rational(r: &mut impl Rng, span: i64) -> Rational {
    let den = r.gen_range(1..=4);
    rat(r.gen_range(-span * den..=span * den), den)
}

pub fn random_int(r: &mut impl Rng, span: i64) -> Rational {
    int(r.gen_range(-span..=span))
}

use avcdos::bss::program::{BinOp, BssNode, BssProgram, Direction, Expr, NodeKind};

pub fn random_expr(r: &mut impl Rng, depth: u32) -> Expr {
    if depth == 0 || r.gen_bool(0.3) {
        return if r.gen_bool(0.6) {
            Expr::Cell(r.gen_range(-2..=4))
        } else {
            Expr::Lit(random_rational(r, 3))
        };
    }
    match r.gen_range(0..9) {
        0 => Expr::negated(random_expr(r, depth - 1)),
        k => {
            let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][(k - 1) / 2];
            Expr::bin(op, random_expr(r, depth - 1), random_expr(r, depth - 1))
        }
    }
}

/// A loop-free program: every successor points forward, ending in an output.
pub fn random_program(r: &mut impl Rng, body: usize) -> BssProgram {
    let n = body + 2;
    let fwd = |r: &mut dyn rand::RngCore, i: usize| r.gen_range(i + 1..n);
    let mut nodes = vec![BssNode {
        id: "start".into(),
        kind: NodeKind::Input { next: fwd(r, 0) },
    }];
    for i in 1..=body {
        let kind = match r.gen_range(0..10) {
            0..=4 => NodeKind::Computation {
                target: r.gen_range(-2..=5),
                expr: random_expr(r, 3),
                next: fwd(r, i),
            },
            5..=7 => NodeKind::Branch {
                expr: random_expr(r, 2),
                if_nonneg: fwd(r, i),
                if_neg: fwd(r, i),
            },
            _ => NodeKind::Shift {
                dir: if r.gen_bool(0.5) {
                    Direction::Left
                } else {
                    Direction::Right
                },
                next: fwd(r, i),
            },
        };
        nodes.push(BssNode {
            id: format!("n{i}"),
            kind,
        });
    }
    let first = r.gen_range(-2..=2);
    nodes.push(BssNode {
        id: "out".into(),
        kind: NodeKind::Output {
            first,
            last: first + r.gen_range(0..3),
        },
    });
    BssProgram::new(nodes).expect("generated program is well formed")
}

use avcdos::linear::LinearSystem;

/// A small random system; half the time a random point is planted so that
/// feasible and infeasible instances both show up.
pub fn random_system(r: &mut impl Rng, max_vars: usize) -> LinearSystem {
    let n = r.gen_range(1..=max_vars);
    let mut sys = LinearSystem::new(n);
    let plant: Option<RVector> = r.gen_bool(0.5).then(|| {
        (0..n)
            .map(|_| rat(r.gen_range(0..=4), r.gen_range(1..=2)))
            .collect()
    });
    let row = |r: &mut dyn rand::RngCore| -> RVector {
        (0..n).map(|_| int(r.gen_range(-3..=3))).collect()
    };
    let rhs_for = |r: &mut dyn rand::RngCore, c: &RVector, slack: bool| -> Rational {
        match &plant {
            Some(x) => {
                let v: Rational = c.iter().zip(x).map(|(a, b)| a * b).sum();
                if slack {
                    v + int(r.gen_range(0..=2))
                } else {
                    v
                }
            }
            None => int(r.gen_range(-4..=4)),
        }
    };
    for _ in 0..r.gen_range(0..=2.min(n)) {
        let c = row(r);
        let b = rhs_for(r, &c, false);
        sys.add_eq(c, b);
    }
    for _ in 0..r.gen_range(1..=5) {
        let c = row(r);
        let b = rhs_for(r, &c, true);
        sys.add_le(c, b);
    }
    for j in 0..n {
        if r.gen_bool(0.7) {
            sys.set_nonneg(j);
        }
    }
    sys
}

// constrained-analysis oracles

use avcdos::channel::CostFn;
use avcdos::linear::enumerate_vertices;
use avcdos::rational::dot;
use avcdos::symmetrize::build_symmetrizing_system;
use num_traits::Zero;

pub fn cost(v: &[i64]) -> CostFn {
    CostFn::new(v.iter().map(|&c| int(c)).collect()).unwrap()
}

pub fn random_cost(r: &mut impl Rng, n: usize) -> CostFn {
    let mut v: Vec<Rational> = (0..n)
        .map(|_| rat(r.gen_range(0..=6), r.gen_range(1..=2)))
        .collect();
    v[r.gen_range(0..n)] = int(0);
    CostFn::new(v).unwrap()
}

/// Per-input costs `c(x) = Σ_s U(s|x) l(s)` of every vertex of U(W).
pub fn vertex_costs(w: &Avc, l: &CostFn) -> Vec<RVector> {
    let d = w.dims();
    enumerate_vertices(&build_symmetrizing_system(w))
        .unwrap()
        .into_iter()
        .map(|u| {
            (0..d.nx)
                .map(|x| (0..d.ns).map(|s| &u[d.u_index(x, s)] * &l.costs()[s]).sum())
                .collect()
        })
        .collect()
}

/// Solves a square system exactly; `None` when singular.
pub fn solve(mut a: Vec<RVector>, mut b: RVector) -> Option<RVector> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        b.swap(c, p);
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = &a[i][c] / &a[c][c];
                for k in c..n {
                    let v = &f * &a[c][k];
                    a[i][k] -= v;
                }
                let v = &f * &b[c];
                b[i] -= v;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

pub fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    go(0, n, k, &mut Vec::new(), f);
}

/// `max_P min_v c_v·P` over `{P ∈ simplex, g·P ≤ Γ}` by trying every
/// choice of tight constraints in the `(P, z)` formulation.
pub fn max_min_oracle(costs: &[RVector], g: &CostFn, gamma: &Rational, nx: usize) -> Rational {
    // constraints a·(P, z) ≤ b
    let mut rows: Vec<(RVector, Rational)> = Vec::new();
    for x in 0..nx {
        let mut a = vec![int(0); nx + 1];
        a[x] = int(-1);
        rows.push((a, int(0)));
    }
    let mut a: RVector = g.costs().to_vec();
    a.push(int(0));
    rows.push((a, gamma.clone()));
    for c in costs {
        let mut a: RVector = c.iter().map(|v| -v).collect();
        a.push(int(1));
        rows.push((a, int(0)));
    }
    let mut simplex = vec![int(1); nx];
    simplex.push(int(0));
    let mut best: Option<Rational> = None;
    for_each_subset(rows.len(), nx, &mut |pick| {
        let mut a = vec![simplex.clone()];
        let mut b = vec![int(1)];
        for &i in pick {
            a.push(rows[i].0.clone());
            b.push(rows[i].1.clone());
        }
        if let Some(pz) = solve(a, b) {
            if rows.iter().all(|(a, b)| dot(a, &pz) <= *b) {
                let z = pz[nx].clone();
                if best.as_ref().is_none_or(|v| z > *v) {
                    best = Some(z);
                }
            }
        }
    });
    best.expect("feasible region is a nonempty polytope")
}
