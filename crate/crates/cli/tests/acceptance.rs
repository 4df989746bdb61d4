//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use ceinv_core::abelian::{identity, mul};
use ceinv_core::{
    build_universe, canonicalize, check_delta1, compute_universal_truncation, evaluate_trace, instantiate, is_one_sided,
    reverse, smith_normal_form, AbelianElement, Eq3, EquivEvidence, EventTrace, Evidence, FgAbelianGroup, GroupContext,
    GroupElement, GroupRingElement, IntMatrix, Kind, Params, Radius, RelationKind, Sign, Symbol, SymbolTuple,
    UniversalTruncation, UniverseConfig,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

const PAPER_FP: &str = r#"{"kind":"fp","generators":["a","b","c"],
    "relators":["a^2 b^2 c^2 b^-2"],
    "quotients":[{"target":{"kind":"cyclic","order":2,"generator":"a"},"images":["a","e","e"]}],
    "max_word_length":14}"#;

fn cli(args: &[&str]) -> String {
    let mut out = Vec::new();
    let argv = std::iter::once("ceinv").chain(args.iter().copied());
    ceinv_cli::run(argv, &mut out).unwrap_or_else(|e| panic!("ceinv {args:?}: {}", e.message));
    String::from_utf8(out).unwrap()
}

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

fn criterion_1() -> String {
    let start = Instant::now();
    let ctx = GroupContext::parse(PAPER_FP).unwrap();
    let s = Symbol::parse(&ctx, "H{b^2+, a b^2 c -}@0").unwrap();
    let r = is_one_sided(&ctx, &s, 2).unwrap();
    assert_eq!(r.verdict, Eq3::True);
    assert_eq!(r.evidence, EquivEvidence::Witness);
    let w = r.witness.expect("one-sided verdicts carry a witness");
    let (a, b) = (SymbolTuple::single(s.clone()), SymbolTuple::single(reverse(&s).unwrap()));
    assert!(w.verify(&ctx, &a, &b).unwrap());

    let (b2, ab2c) = (ctx.parse_word("b^2").unwrap(), ctx.parse_word("a b^2 c").unwrap());
    let eq = ctx.equality(&b2, &ab2c).unwrap();
    assert_eq!(eq.verdict, Eq3::False);
    assert_eq!(eq.evidence, Evidence::Quotient(0));
    let q = ctx.quotient(0).unwrap();
    assert_eq!(q.order(), Some(2));
    assert_ne!(ctx.apply_quotient(0, &b2).unwrap(), ctx.apply_quotient(0, &ab2c).unwrap());

    let out = cli(&["--group", PAPER_FP, "--radius", "2", "one-sided", "H{b^2+, a b^2 c -}@0"]);
    assert!(out.starts_with("verdict: true\nevidence: witness\nwitness: "), "{out}");
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    format!("witness {}, {elapsed:.2?}", w.format(&ctx))
}

fn criterion_2() -> String {
    let start = Instant::now();
    let z = GroupContext::free_abelian(1).unwrap();
    let mut checked = 0;
    for r in 0..=5 {
        for k in 0..=r {
            let s = Symbol::parse(&z, &format!("H{{x^{k}+, x^{r}-}}@0")).unwrap();
            let v = is_one_sided(&z, &s, 2).unwrap();
            if k == r {
                assert_eq!(v.verdict, Eq3::True, "k = r = {k}");
                let w = v.witness.unwrap();
                assert!(w.verify(&z, &SymbolTuple::single(s.clone()), &SymbolTuple::single(reverse(&s).unwrap())).unwrap());
            } else {
                assert_eq!(v.verdict, Eq3::False, "k = {k}, r = {r}");
            }
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    format!("{checked} pairs, {elapsed:.2?}")
}

/// A finite group given by its own multiplication table, matched to the
/// elements of a context.
struct Table {
    ctx: GroupContext,
    mul: Vec<Vec<usize>>,
    gens: Vec<usize>,
    elements: Vec<GroupElement>,
}

impl Table {
    fn cyclic(n: usize) -> Table {
        let ctx = GroupContext::cyclic(n as u64).unwrap();
        let mut elements = vec![ctx.identity(); n];
        for g in ctx.elements().unwrap() {
            let i = g.as_residue().unwrap() as usize;
            elements[i] = g;
        }
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Table::checked(ctx, mul, if n > 1 { vec![1] } else { vec![] }, elements)
    }

    fn from_perms(perms: &[Vec<usize>], names: &[&str], gens: Vec<usize>) -> Table {
        let idx = |p: &Vec<usize>| perms.iter().position(|q| q == p).unwrap();
        let mul: Vec<Vec<usize>> =
            perms.iter().map(|a| perms.iter().map(|b| idx(&b.iter().map(|&x| a[x]).collect())).collect()).collect();
        let spec = serde_json::json!({"kind":"finite_table","elements":names,"table":mul});
        let ctx = GroupContext::parse(&spec.to_string()).unwrap();
        let elements = names.iter().map(|n| ctx.parse_word(n).unwrap()).collect();
        Table::checked(ctx, mul, gens, elements)
    }

    fn s3() -> Table {
        let perms = [[0, 1, 2], [1, 2, 0], [2, 0, 1], [1, 0, 2], [0, 2, 1], [2, 1, 0]].map(|p| p.to_vec());
        Table::from_perms(&perms, &["e", "r", "r2", "s", "t", "u"], vec![1, 3])
    }

    fn klein() -> Table {
        let perms = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]].map(|p| p.to_vec());
        Table::from_perms(&perms, &["e", "a", "b", "c"], vec![1, 2])
    }

    fn checked(ctx: GroupContext, mul: Vec<Vec<usize>>, gens: Vec<usize>, elements: Vec<GroupElement>) -> Table {
        for (a, row) in mul.iter().enumerate() {
            for (b, &c) in row.iter().enumerate() {
                assert_eq!(ctx.multiply(&elements[a], &elements[b]).unwrap(), elements[c]);
            }
        }
        Table { ctx, mul, gens, elements }
    }

    fn n(&self) -> usize {
        self.mul.len()
    }
}

/// Raw symbols of one kind over a table group with coefficients in [-1, 1],
/// numbered as `entries * 3^n + degree` in mixed radix.
struct RawSpace<'a> {
    t: &'a Table,
    kind: Kind,
    degrees: usize,
}

impl RawSpace<'_> {
    fn size(&self) -> usize {
        (2 * self.t.n()).pow(self.kind.arity() as u32) * self.degrees
    }

    fn decode(&self, id: usize) -> (Vec<(usize, usize)>, Vec<usize>) {
        let n = self.t.n();
        let (mut e, mut d) = (id / self.degrees, id % self.degrees);
        let entries = (0..self.kind.arity())
            .map(|_| {
                let x = e % (2 * n);
                e /= 2 * n;
                (x / 2, x % 2)
            })
            .collect();
        let degree = (0..n)
            .map(|_| {
                let c = d % 3;
                d /= 3;
                c
            })
            .collect();
        (entries, degree)
    }

    fn encode(&self, entries: &[(usize, usize)], degree: &[usize]) -> usize {
        let n = self.t.n();
        let e = entries.iter().rev().fold(0, |acc, &(g, s)| acc * 2 * n + 2 * g + s);
        let d = degree.iter().rev().fold(0, |acc, &c| acc * 3 + c);
        e * self.degrees + d
    }

    fn act(&self, id: usize, f: impl Fn(usize) -> usize) -> usize {
        let (entries, degree) = self.decode(id);
        let entries: Vec<_> = entries.into_iter().map(|(g, s)| (f(g), s)).collect();
        let mut moved = vec![1; degree.len()];
        for (g, &c) in degree.iter().enumerate() {
            moved[f(g)] = c;
        }
        self.encode(&entries, &moved)
    }

    fn symbol(&self, id: usize) -> Symbol {
        let (entries, degree) = self.decode(id);
        let ctx = &self.t.ctx;
        let entries =
            entries.iter().map(|&(g, s)| (self.t.elements[g].clone(), if s == 0 { Sign::Plus } else { Sign::Minus })).collect();
        let terms = degree.iter().enumerate().map(|(g, &c)| (self.t.elements[g].clone(), big(c as i64 - 1)));
        Symbol::new(ctx, self.kind, entries, GroupRingElement::from_terms(ctx, terms).unwrap()).unwrap()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Partitions the raw space by closing under generator moves, then checks
/// that canonical encodings are constant on parts and distinct across them.
fn orbit_check(space: &RawSpace) -> usize {
    let size = space.size();
    let t = space.t;
    let mut parent: Vec<usize> = (0..size).collect();
    for id in 0..size {
        let mut moves: Vec<usize> = Vec::new();
        for &g in &t.gens {
            moves.push(space.act(id, |x| t.mul[g][x]));
            moves.push(space.act(id, |x| t.mul[x][g]));
        }
        let (entries, degree) = space.decode(id);
        for i in 0..entries.len() - 1 {
            let mut swapped = entries.clone();
            swapped.swap(i, i + 1);
            moves.push(space.encode(&swapped, &degree));
        }
        for m in moves {
            let (a, b) = (find(&mut parent, id), find(&mut parent, m));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let roots: Vec<usize> = (0..size).map(|i| find(&mut parent, i)).collect();
    let encoding = |id: usize| canonicalize(&t.ctx, &SymbolTuple::single(space.symbol(id)), 0).unwrap().encoding;
    let reps: Vec<usize> = (0..size).filter(|&i| roots[i] == i).collect();
    let rep_enc: HashMap<usize, Vec<u8>> = reps.par_iter().map(|&r| (r, encoding(r))).collect();
    let distinct: HashSet<&Vec<u8>> = rep_enc.values().collect();
    assert_eq!(distinct.len(), reps.len(), "{}: two orbits share a canonical form", space.kind);
    let bad = (0..size).into_par_iter().find_any(|&i| encoding(i) != rep_enc[&roots[i]]);
    assert!(bad.is_none(), "{}: symbol {:?} disagrees with its orbit", space.kind, bad.map(|i| space.symbol(i)));
    reps.len()
}

fn criterion_3() -> String {
    let start = Instant::now();
    let mut tables: Vec<(String, Table)> = (2..=6).map(|n| (format!("C{n}"), Table::cyclic(n))).collect();
    tables.push(("S3".into(), Table::s3()));
    let mut parts = Vec::new();
    for (name, t) in &tables {
        let mut classes = 0;
        for kind in [Kind::E, Kind::H, Kind::T] {
            classes += orbit_check(&RawSpace { t, kind, degrees: 3usize.pow(t.n() as u32) });
        }
        let u = build_universe(&t.ctx, &UniverseConfig::new(Radius::Infinite, 1, &[Kind::E, Kind::H, Kind::T])).unwrap();
        assert_eq!(u.len(), classes, "{name}: universe size");
        parts.push(format!("{name}:{classes}"));
    }
    format!("classes {}, {:.1?}", parts.join(" "), start.elapsed())
}

fn random_signed(rng: &mut StdRng, els: &[GroupElement]) -> (GroupElement, Sign) {
    (els.choose(rng).unwrap().clone(), if rng.gen() { Sign::Plus } else { Sign::Minus })
}

fn criterion_4() -> String {
    let t = Table::s3();
    let ctx = &t.ctx;
    let mut rng = StdRng::seed_from_u64(4);
    let expected = [2, 2, 2, 2, 4, 4, 4, 10];
    for (kind, want) in RelationKind::ALL.into_iter().zip(expected) {
        for _ in 0..100 {
            let mut entries: Vec<(GroupElement, Sign)> =
                (0..kind.entry_count()).map(|_| random_signed(&mut rng, &t.elements)).collect();
            if kind == RelationKind::QQ {
                // Distinct elements make each plane recognizable in the terms.
                let mut pool = t.elements.clone();
                pool.shuffle(&mut rng);
                for (slot, g) in entries.iter_mut().zip(pool) {
                    slot.0 = g;
                }
            }
            let extra = kind.has_extra().then(|| t.elements.choose(&mut rng).unwrap().clone());
            let terms = (0..rng.gen_range(0..4)).map(|_| (t.elements.choose(&mut rng).unwrap().clone(), big(rng.gen_range(-2..=2))));
            let degree = GroupRingElement::from_terms(ctx, terms).unwrap();
            let rel = instantiate(ctx, kind, &Params { entries: entries.clone(), extra, degree }).unwrap();
            assert_eq!(rel.terms.len(), want, "{kind}");
            if kind == RelationKind::QQ {
                let mut subsets: BTreeMap<BTreeSet<Vec<u8>>, usize> = BTreeMap::new();
                for term in &rel.terms {
                    let planes: BTreeSet<Vec<u8>> = term.symbol.entries().iter().map(|(g, _)| ctx.key(g)).collect();
                    assert_eq!(planes.len(), 4);
                    *subsets.entry(planes).or_default() += 1;
                }
                assert_eq!(subsets.len(), 5);
                assert!(subsets.values().all(|&c| c == 2));
            }
        }
    }
    "800 instances".into()
}

/// Every truncation computed for the delta1 and trace criteria.
fn truncations() -> Vec<(String, UniversalTruncation)> {
    let all = [Kind::E, Kind::H, Kind::T, Kind::Q];
    let mut groups: Vec<(String, Table)> = (1..=4).map(|n| (format!("C{n}"), Table::cyclic(n))).collect();
    groups.push(("V4".into(), Table::klein()));
    let mut out = Vec::new();
    for (name, t) in groups {
        let mut windows = vec![(0, all.to_vec())];
        windows.push(if t.n() <= 3 { (1, all.to_vec()) } else { (1, vec![Kind::E, Kind::H, Kind::T]) });
        for (c, kinds) in windows {
            let u = build_universe(&t.ctx, &UniverseConfig::new(Radius::Infinite, c, &kinds)).unwrap();
            let label = format!("{name}/c{c}/{}", kinds.iter().map(|k| k.as_char()).collect::<String>());
            out.push((label, compute_universal_truncation(u, 10_000_000).unwrap()));
        }
    }
    out
}

fn criterion_5(truncs: &[(String, UniversalTruncation)]) -> String {
    let trivial = GroupContext::trivial();
    let u = build_universe(&trivial, &UniverseConfig::new(Radius::Infinite, 0, &[Kind::E, Kind::H])).unwrap();
    let gu = compute_universal_truncation(u, 1000).unwrap();
    assert_eq!(gu.group.free_rank, 1);
    assert_eq!(gu.group.torsion, vec![big(2)]);
    let report = check_delta1(&gu.g_u, &gu.universe, 1000).unwrap();
    assert!(report.pass && report.violations.is_empty());
    for (label, t) in truncs {
        let report = check_delta1(&t.g_u, &t.universe, 10_000_000).unwrap();
        assert!(report.violations.is_empty(), "{label}: {} violations", report.violations.len());
    }
    let shown: Vec<String> = truncs.iter().map(|(l, t)| format!("{l}={}", t.group)).collect();
    format!("trivial/EH = {}; {}", gu.group, shown.join(", "))
}

/// Fraction-free Gaussian elimination.
fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign = big(1);
    let mut prev = big(1);
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    if n == 0 {
        sign
    } else {
        sign * &a[n - 1][n - 1]
    }
}

fn criterion_6() -> String {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(6);
    let mut square = 0;
    for _ in 0..200 {
        let (r, c) = (rng.gen_range(1..=20), rng.gen_range(1..=20));
        let rows: Vec<Vec<i64>> = (0..r).map(|_| (0..c).map(|_| rng.gen_range(-9..=9)).collect()).collect();
        let m = IntMatrix::from_dense_i64(r, c, &rows);
        let s = smith_normal_form(&m);
        let d = mul(&mul(&s.u, &m.to_dense(), r), &s.v, c);
        for (i, row) in d.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let want = if i == j { s.diagonal[i].clone() } else { BigInt::zero() };
                assert_eq!(*x, want);
            }
        }
        assert!(s.diagonal.iter().all(|x| !x.is_negative()));
        for w in s.diagonal.windows(2) {
            assert!(if w[0].is_zero() { w[1].is_zero() } else { w[1].is_multiple_of(&w[0]) });
        }
        assert_eq!(bareiss_det(s.u.clone()).abs(), big(1));
        assert_eq!(bareiss_det(s.v.clone()).abs(), big(1));
        if r == c {
            let det = bareiss_det(m.to_dense()).abs();
            if !det.is_zero() {
                square += 1;
                assert_eq!(det, s.diagonal.iter().fold(big(1), |acc, x| acc * x));
            }
        }
    }
    assert_eq!(bareiss_det(identity(3)), big(1));
    format!("200 matrices, {square} square nonsingular, {:.2?}", start.elapsed())
}

fn criterion_7(truncs: &[(String, UniversalTruncation)]) -> String {
    let mut relations = 0;
    for (label, t) in truncs {
        for rel in &t.relations {
            let trace = EventTrace::from_relation(&t.universe, rel);
            let v = evaluate_trace(&trace, &t.g_u, &t.universe).unwrap();
            assert!(t.g_u.target.is_zero(&v), "{label}: {}", rel.format());
        }
        relations += t.relations.len();
    }

    let mut rng = StdRng::seed_from_u64(7);
    let target = FgAbelianGroup::new(1, vec![big(4)]).unwrap();
    let mut substitutions = 0;
    for i in 0..50 {
        let (label, t) = &truncs[i % truncs.len()];
        let images: Vec<AbelianElement> = (0..t.group.rank())
            .map(|j| {
                // Flat coordinates of Z + Z/4 are (Z/4, Z). An image of an
                // element of order `o` must be killed by `o`.
                let coords = match t.group.coordinate_order(j) {
                    Some(o) => [big(4) / o.gcd(&big(4)) * big(rng.gen_range(0..4)), BigInt::zero()],
                    None => [big(rng.gen_range(0..4)), big(rng.gen_range(-5..=5))],
                };
                target.element(&coords).unwrap()
            })
            .collect();
        let a = t.g_u.compose(target.clone(), &images).unwrap();
        assert!(check_delta1(&a, &t.universe, 10_000_000).unwrap().pass, "{label}");
        for s in t.universe.symbols().iter().filter(|s| s.kind().is_reversible()) {
            let forward = EventTrace { events: vec![(1, s.clone()), (-1, s.clone()), (1, s.clone())] };
            let r = reverse(s).unwrap();
            let swapped = EventTrace { events: vec![(-1, r.clone()), (1, r.clone()), (-1, r)] };
            let (x, y) = (evaluate_trace(&forward, &a, &t.universe).unwrap(), evaluate_trace(&swapped, &a, &t.universe).unwrap());
            assert!(target.equal(&x, &y).unwrap(), "{label}: {}", s.format(&t.universe.context().clone()));
            substitutions += 1;
        }
    }
    format!("{relations} relation traces vanish, {substitutions} reversal substitutions over 50 assignments")
}

fn criterion_8() -> String {
    let t = GroupContext::trivial();
    let mut seen: BTreeMap<Vec<u8>, (Kind, usize, i64)> = BTreeMap::new();
    for kind in Kind::ALL {
        for signs in 0..1u32 << kind.arity() {
            for m in -3i64..=3 {
                let entries: Vec<String> =
                    (0..kind.arity()).map(|i| format!("e{}", if signs >> i & 1 == 0 { '+' } else { '-' })).collect();
                let s = Symbol::parse(&t, &format!("{kind}{{{}}}@{m}", entries.join(","))).unwrap();
                let c = canonicalize(&t, &SymbolTuple::single(s.clone()), 0).unwrap();
                let key = (kind, s.plus_count(), m);
                assert_eq!(*seen.entry(c.encoding).or_insert(key), key, "{}", s.format(&t));
            }
        }
    }
    let classes: usize = Kind::ALL.iter().map(|k| (k.arity() + 1) * 7).sum();
    assert_eq!(seen.len(), classes);
    let u = build_universe(&t, &UniverseConfig::new(Radius::Infinite, 3, &Kind::ALL)).unwrap();
    assert_eq!(u.len(), classes);
    format!("{classes} classes = (kind, plus count, m)")
}

fn main() {
    // Failures are reported on their criterion line.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> String| {
        match catch_unwind(AssertUnwindSafe(f)) {
            Ok(detail) => println!("PASS criterion {n}: {name} ({detail})"),
            Err(e) => {
                let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                println!("FAIL criterion {n}: {name} ({})", msg.unwrap_or_default());
                failed += 1;
            }
        }
    };
    report(1, "fp example is one-sided, b^2 != a b^2 c by quotient", &mut criterion_1);
    report(2, "Z example, + on the smaller power", &mut criterion_2);
    report(3, "canonical forms match orbit closure", &mut criterion_3);
    report(4, "relation term counts and QQ planes", &mut criterion_4);
    report(6, "Smith normal form", &mut criterion_6);
    let mut truncs = Vec::new();
    report(5, "truncated universal group and delta1", &mut || {
        truncs = truncations();
        criterion_5(&truncs)
    });
    report(7, "relation traces and reversal substitution", &mut || {
        assert!(!truncs.is_empty(), "no truncations");
        criterion_7(&truncs)
    });
    report(8, "trivial-group reduction", &mut criterion_8);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
