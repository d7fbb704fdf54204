//! Central finite-difference gradient checks shared by the gradient tests
//! and the acceptance suite.

#![allow(dead_code)]

use esc1d::inference::{aggregate, decide, AggregationRule, PredictionSet};
use esc1d::model::{ConfigName, Model};
use esc1d::nn::{
    flatten, msle_loss, relu, relu_backward, softmax, softmax_backward, unflatten, BatchNorm, Conv1d, Dense, Dropout,
    MaxPool1d, Tensor2D,
};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LAYER_TOL: f64 = 1e-4;
pub const LOSS_TOL: f64 = 1e-8;
pub const MIN_SHAPES: usize = 20;

const H: f64 = 1e-5;

/// `‖a − n‖ / max(‖a‖, ‖n‖)`, or 0 when both vanish.
pub fn rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(numeric).map(|(a, n)| a - n).collect();
    let scale = norm(analytic).max(norm(numeric));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// Row-major copy, whatever the memory layout.
fn flat(a: &Array2<f64>) -> Vec<f64> {
    a.iter().cloned().collect()
}

pub fn numeric_grad(x: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + H;
            let up = f(&probe);
            probe[i] = x[i] - H;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * H)
        })
        .collect()
}

fn dot(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    (a * b).sum()
}

fn randv(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Values bounded away from zero so ReLU kinks are never straddled.
fn away_from_zero(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let m = rng.gen_range(0.05..1.0);
            if rng.gen_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect()
}

/// Well-separated distinct values so pooling maxima never swap.
fn distinct(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|i| i as f64 * 0.01 - n as f64 * 0.005).collect();
    v.shuffle(rng);
    v
}

fn tensor(c: usize, l: usize, v: Vec<f64>) -> Tensor2D {
    Tensor2D::from_vec(c, l, v).expect("shape")
}

/// Worst relative error over every checked shape.
#[derive(Debug, Clone)]
pub struct GradCheck {
    pub name: &'static str,
    pub shapes: usize,
    pub worst: f64,
    /// Coordinates dropped because the loss is not smooth around them.
    pub skipped: usize,
}

impl GradCheck {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            shapes: 0,
            worst: 0.0,
            skipped: 0,
        }
    }

    fn record(&mut self, errs: &[f64]) {
        self.shapes += 1;
        for &e in errs {
            self.worst = self.worst.max(e);
        }
    }
}

pub fn check_conv(trials: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GradCheck::new("conv1d");
    for _ in 0..trials {
        let (cin, cout) = (rng.gen_range(1..4), rng.gen_range(1..5));
        let (k, stride) = (rng.gen_range(1..7), rng.gen_range(1..4));
        let len = k + rng.gen_range(0..20);
        let mut layer = Conv1d::new(cin, cout, k, stride).unwrap();
        layer.weight.data = Array2::from_shape_vec((cout, cin * k), randv(&mut rng, cout * cin * k)).unwrap();
        layer.bias.data = Array2::from_shape_vec((cout, 1), randv(&mut rng, cout)).unwrap();
        let x = tensor(cin, len, randv(&mut rng, cin * len));
        let y = layer.forward(&x).unwrap();
        let u = Array2::from_shape_vec(y.data.raw_dim(), randv(&mut rng, y.data.len())).unwrap();
        let g = layer.backward(&x, &Tensor2D::new(u.clone())).unwrap();

        let nx = numeric_grad(x.values(), |v| dot(&layer.forward(&tensor(cin, len, v.to_vec())).unwrap().data, &u));
        let w0: Vec<f64> = layer.weight.data.iter().cloned().collect();
        let nw = numeric_grad(&w0, |v| {
            let mut l = layer.clone();
            l.weight.data = Array2::from_shape_vec((cout, cin * k), v.to_vec()).unwrap();
            dot(&l.forward(&x).unwrap().data, &u)
        });
        let b0: Vec<f64> = layer.bias.data.iter().cloned().collect();
        let nb = numeric_grad(&b0, |v| {
            let mut l = layer.clone();
            l.bias.data = Array2::from_shape_vec((cout, 1), v.to_vec()).unwrap();
            dot(&l.forward(&x).unwrap().data, &u)
        });
        out.record(&[
            rel_err(g.input.unwrap().values(), &nx),
            rel_err(&flat(&g.weight), &nw),
            rel_err(&flat(&g.bias), &nb),
        ]);
    }
    out
}

pub fn check_pool(trials: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GradCheck::new("maxpool");
    for _ in 0..trials {
        let c = rng.gen_range(1..4);
        let (p, s) = (rng.gen_range(1..5), rng.gen_range(1..4));
        let len = p + rng.gen_range(0..20);
        let pool = MaxPool1d::new(p, s).unwrap();
        let x = tensor(c, len, distinct(&mut rng, c * len));
        let fwd = pool.forward(&x).unwrap();
        let u = Array2::from_shape_vec(fwd.output.data.raw_dim(), randv(&mut rng, fwd.output.data.len())).unwrap();
        let dx = pool.backward(&fwd.argmax, &Tensor2D::new(u.clone()), len).unwrap();
        let nx = numeric_grad(x.values(), |v| dot(&pool.forward(&tensor(c, len, v.to_vec())).unwrap().output.data, &u));
        out.record(&[rel_err(dx.values(), &nx)]);
    }
    out
}

pub fn check_batchnorm(trials: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GradCheck::new("batchnorm");
    for _ in 0..trials {
        let (c, l, b) = (rng.gen_range(1..4), rng.gen_range(1..6), rng.gen_range(2..5));
        let mut layer = BatchNorm::new(c);
        layer.gamma.data = Array2::from_shape_vec((c, 1), randv(&mut rng, c)).unwrap();
        layer.beta.data = Array2::from_shape_vec((c, 1), randv(&mut rng, c)).unwrap();
        let xs: Vec<f64> = randv(&mut rng, b * c * l);
        let us: Vec<Array2<f64>> = (0..b)
            .map(|_| Array2::from_shape_vec((c, l), randv(&mut rng, c * l)).unwrap())
            .collect();
        let split = |v: &[f64]| v.chunks(c * l).map(|ch| tensor(c, l, ch.to_vec())).collect::<Vec<_>>();
        let objective = |layer: &BatchNorm, v: &[f64]| {
            let mut l2 = layer.clone();
            let (ys, _) = l2.forward_train(&split(v)).unwrap();
            ys.iter().zip(&us).map(|(y, u)| dot(&y.data, u)).sum::<f64>()
        };
        let mut l1 = layer.clone();
        let (_, cache) = l1.forward_train(&split(&xs)).unwrap();
        let ups: Vec<Tensor2D> = us.iter().map(|u| Tensor2D::new(u.clone())).collect();
        let (dxs, dg, db) = layer.backward(&cache, &ups).unwrap();
        let dx: Vec<f64> = dxs.iter().flat_map(|t| t.values().to_vec()).collect();
        let nx = numeric_grad(&xs, |v| objective(&layer, v));
        let g0: Vec<f64> = layer.gamma.data.iter().cloned().collect();
        let ng = numeric_grad(&g0, |v| {
            let mut l2 = layer.clone();
            l2.gamma.data = Array2::from_shape_vec((c, 1), v.to_vec()).unwrap();
            objective(&l2, &xs)
        });
        let b0: Vec<f64> = layer.beta.data.iter().cloned().collect();
        let nb = numeric_grad(&b0, |v| {
            let mut l2 = layer.clone();
            l2.beta.data = Array2::from_shape_vec((c, 1), v.to_vec()).unwrap();
            objective(&l2, &xs)
        });
        out.record(&[
            rel_err(&dx, &nx),
            rel_err(&flat(&dg), &ng),
            rel_err(&flat(&db), &nb),
        ]);
    }
    out
}

pub fn check_dense(trials: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GradCheck::new("dense");
    for _ in 0..trials {
        let (i, o) = (rng.gen_range(1..12), rng.gen_range(1..8));
        let mut layer = Dense::new(i, o);
        layer.weight.data = Array2::from_shape_vec((o, i), randv(&mut rng, o * i)).unwrap();
        layer.bias.data = Array2::from_shape_vec((1, o), randv(&mut rng, o)).unwrap();
        let x = tensor(1, i, randv(&mut rng, i));
        let u = Array2::from_shape_vec((1, o), randv(&mut rng, o)).unwrap();
        let (dx, dw, db) = layer.backward(&x, &Tensor2D::new(u.clone())).unwrap();
        let nx = numeric_grad(x.values(), |v| dot(&layer.forward(&tensor(1, i, v.to_vec())).unwrap().data, &u));
        let w0: Vec<f64> = layer.weight.data.iter().cloned().collect();
        let nw = numeric_grad(&w0, |v| {
            let mut l = layer.clone();
            l.weight.data = Array2::from_shape_vec((o, i), v.to_vec()).unwrap();
            dot(&l.forward(&x).unwrap().data, &u)
        });
        let b0: Vec<f64> = layer.bias.data.iter().cloned().collect();
        let nb = numeric_grad(&b0, |v| {
            let mut l = layer.clone();
            l.bias.data = Array2::from_shape_vec((1, o), v.to_vec()).unwrap();
            dot(&l.forward(&x).unwrap().data, &u)
        });
        out.record(&[
            rel_err(dx.values(), &nx),
            rel_err(&flat(&dw), &nw),
            rel_err(&flat(&db), &nb),
        ]);
    }
    out
}

pub fn check_relu(trials: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GradCheck::new("relu");
    for _ in 0..trials {
        let (c, l) = (rng.gen_range(1..4), rng.gen_range(1..20));
        let x = tensor(c, l, away_from_zero(&mut rng, c * l));
        let u = Array2::from_shape_vec((c, l), randv(&mut rng, c * l)).unwrap();
        let dx = relu_backward(&x, &Tensor2D::new(u.clone())).unwrap();
        let nx = numeric_grad(x.values(), |v| dot(&relu(&tensor(c, l, v.to_vec())).data, &u));
        out.record(&[rel_err(dx.values(), &nx)]);
    }
    out
}

pub fn check_softmax(trials: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GradCheck::new("softmax");
    for _ in 0..trials {
        let k = rng.gen_range(1..12);
        let x = tensor(1, k, (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect());
        let u = Array2::from_shape_vec((1, k), randv(&mut rng, k)).unwrap();
        let y = softmax(&x).unwrap();
        let dx = softmax_backward(&y, &Tensor2D::new(u.clone())).unwrap();
        let nx = numeric_grad(x.values(), |v| dot(&softmax(&tensor(1, k, v.to_vec())).unwrap().data, &u));
        out.record(&[rel_err(dx.values(), &nx)]);
    }
    out
}

pub fn check_dropout(trials: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GradCheck::new("dropout");
    for t in 0..trials {
        let (c, l) = (rng.gen_range(1..4), rng.gen_range(1..20));
        let layer = Dropout::new(rng.gen_range(0.0..0.9)).unwrap();
        let x = tensor(c, l, randv(&mut rng, c * l));
        let u = Array2::from_shape_vec((c, l), randv(&mut rng, c * l)).unwrap();
        let mask_seed = seed ^ t as u64;
        let (_, mask) = layer.forward_train(&x, &mut ChaCha8Rng::seed_from_u64(mask_seed));
        let dx = Dropout::backward(&mask, &Tensor2D::new(u.clone())).unwrap();
        let nx = numeric_grad(x.values(), |v| {
            let (y, _) = layer.forward_train(&tensor(c, l, v.to_vec()), &mut ChaCha8Rng::seed_from_u64(mask_seed));
            dot(&y.data, &u)
        });
        out.record(&[rel_err(dx.values(), &nx)]);
    }
    out
}

pub fn check_flatten(trials: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GradCheck::new("flatten");
    for _ in 0..trials {
        let (c, l) = (rng.gen_range(1..5), rng.gen_range(1..10));
        let x = tensor(c, l, randv(&mut rng, c * l));
        let u = Array2::from_shape_vec((1, c * l), randv(&mut rng, c * l)).unwrap();
        let dx = unflatten(&Tensor2D::new(u.clone()), c, l).unwrap();
        let nx = numeric_grad(x.values(), |v| dot(&flatten(&tensor(c, l, v.to_vec())).data, &u));
        out.record(&[rel_err(dx.values(), &nx)]);
    }
    out
}

/// MSLE with respect to the prediction, for random non-negative pairs.
pub fn check_loss(trials: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GradCheck::new("msle");
    for _ in 0..trials {
        let k = rng.gen_range(1..16);
        let p: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
        let t: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
        let (_, g) = msle_loss(&p, &t).unwrap();
        let n = numeric_grad(&p, |v| msle_loss(v, &t).unwrap().0);
        out.record(&[rel_err(&g, &n)]);
    }
    out
}

/// End-to-end check on the smallest configuration: batch loss against a
/// random subset of coordinates in every trainable block.
pub fn check_model(seed: u64, coords_per_block: usize) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = Model::build(ConfigName::In1600, seed).unwrap();
    let frames: Vec<Vec<f64>> = (0..2).map(|_| randv(&mut rng, model.input_len())).collect();
    let labels = [3usize, 7];
    let dropout_seed = seed.wrapping_add(1);

    let loss_of = |m: &mut Model| -> (f64, Vec<Vec<f64>>, esc1d::model::Tape) {
        let refs: Vec<&[f64]> = frames.iter().map(|f| f.as_slice()).collect();
        let (outs, tape) = m.forward_train(&refs, &mut ChaCha8Rng::seed_from_u64(dropout_seed)).unwrap();
        let mut total = 0.0;
        let mut grads = Vec::new();
        for (o, &l) in outs.iter().zip(&labels) {
            let mut t = vec![0.0; 10];
            t[l] = 1.0;
            let (v, g) = msle_loss(o, &t).unwrap();
            total += v / 2.0;
            grads.push(g.into_iter().map(|x| x / 2.0).collect());
        }
        (total, grads, tape)
    };

    model.zero_grad();
    let (_, grads, tape) = loss_of(&mut model);
    model.backward(&tape, grads).unwrap();
    let analytic: Vec<Vec<f64>> = model.params_mut().iter().map(|p| p.grad.to_vec()).collect();

    let mut out = GradCheck::new("model");
    for (block, a) in analytic.iter().enumerate() {
        let picks: Vec<usize> = (0..coords_per_block.min(a.len())).map(|_| rng.gen_range(0..a.len())).collect();
        let mut num = Vec::new();
        let mut ana = Vec::new();
        for &i in &picks {
            let orig = model.params_mut()[block].value[i];
            let mut eval_at = |v: f64| {
                model.params_mut()[block].value[i] = v;
                loss_of(&mut model).0
            };
            let mut central = |h: f64| (eval_at(orig + h) - eval_at(orig - h)) / (2.0 * h);
            let (wide, narrow) = (central(H), central(H / 8.0));
            model.params_mut()[block].value[i] = orig;
            // Step sizes disagreeing means a ReLU or pooling kink sits inside the stencil.
            if (wide - narrow).abs() > 1e-6 * wide.abs().max(1e-3) {
                out.skipped += 1;
                continue;
            }
            num.push(wide);
            ana.push(a[i]);
        }
        out.record(&[rel_err(&ana, &num)]);
    }
    out
}

pub fn all_layer_checks(trials: usize, seed: u64) -> Vec<GradCheck> {
    vec![
        check_conv(trials, seed),
        check_pool(trials, seed + 1),
        check_batchnorm(trials, seed + 2),
        check_dense(trials, seed + 3),
        check_relu(trials, seed + 4),
        check_softmax(trials, seed + 5),
        check_dropout(trials, seed + 6),
        check_flatten(trials, seed + 7),
    ]
}

/// Reference stage dimensions `(label, filters, length)` per configuration.
pub fn reference_stages(name: ConfigName) -> Vec<(&'static str, usize, usize)> {
    let long = |d: [usize; 8]| {
        let f = [16, 16, 32, 32, 64, 128, 256, 256];
        let l = ["CL1", "PL1", "CL2", "PL2", "CL3", "CL4", "CL5", "PL3"];
        (0..8).map(|i| (l[i], f[i], d[i])).collect::<Vec<_>>()
    };
    let short = |labels: &[&'static str], filters: &[usize], dims: &[usize]| {
        labels.iter().zip(filters).zip(dims).map(|((&l, &f), &d)| (l, f, d)).collect::<Vec<_>>()
    };
    match name {
        ConfigName::In50999 => long([25_468, 3_183, 1_576, 197, 91, 42, 20, 5]),
        ConfigName::In32000 => long([15_969, 1_996, 983, 122, 54, 24, 11, 2]),
        ConfigName::In16000 => short(
            &["CL1", "PL1", "CL2", "PL2", "CL3", "CL4"],
            &[16, 16, 32, 32, 64, 128],
            &[7_969, 996, 483, 60, 23, 8],
        ),
        ConfigName::In16000G => short(
            &["CL1", "PL1", "CL2", "PL2", "CL3", "CL4"],
            &[64, 64, 32, 32, 64, 128],
            &[15_489, 1_936, 953, 119, 52, 23],
        ),
        ConfigName::In8000 => short(&["CL1", "PL1", "CL2", "PL2", "CL3"], &[16, 16, 32, 32, 64], &[3_969, 496, 233, 29, 7]),
        ConfigName::In1600 => short(&["CL1", "PL1", "CL2", "PL2", "CL3"], &[16, 16, 32, 32, 64], &[785, 392, 189, 94, 44]),
    }
}

pub fn reference_params(name: ConfigName) -> usize {
    match name {
        ConfigName::In50999 => 421_146,
        ConfigName::In32000 => 322_842,
        ConfigName::In16000 => 256_538,
        ConfigName::In16000G => 550_506,
        ConfigName::In8000 => 116_890,
        ConfigName::In1600 => 394_906,
    }
}

/// Mismatches between built and reference stage shapes.
pub fn shape_mismatches(name: ConfigName) -> Vec<String> {
    let model = Model::build(name, 0).unwrap();
    let built: Vec<(String, usize, usize)> = model
        .stage_shapes()
        .unwrap()
        .into_iter()
        .map(|s| (s.label, s.channels, s.length))
        .collect();
    let want = reference_stages(name);
    let mut bad = Vec::new();
    if built.len() != want.len() {
        bad.push(format!("{name}: {} stages, expected {}", built.len(), want.len()));
    }
    for (b, w) in built.iter().zip(&want) {
        if (b.0.as_str(), b.1, b.2) != *w {
            bad.push(format!("{name}: built {b:?}, reference {w:?}"));
        }
    }
    bad
}

/// Probability vectors of length `k` on a quarter grid, as integer quarters.
pub fn quarter_simplex(k: usize) -> Vec<Vec<u32>> {
    fn rec(k: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=left {
            prefix.push(v);
            rec(k - 1, left - v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, 4, &mut Vec::new(), &mut out);
    out
}

/// Lowest index attaining the maximum, on exact integers.
fn first_max(v: &[u32]) -> usize {
    let m = *v.iter().max().unwrap();
    v.iter().position(|&x| x == m).unwrap()
}

/// Exhaustively compares both rules against integer-arithmetic oracles over
/// every prediction set with up to `max_s` frames and `max_k` classes.
/// Returns `(sets checked, mismatches)`.
pub fn aggregation_oracle(max_s: usize, max_k: usize) -> (usize, usize) {
    let mut checked = 0;
    let mut bad = 0;
    for k in 1..=max_k {
        let grid = quarter_simplex(k);
        for s in 1..=max_s {
            let mut idx = vec![0usize; s];
            loop {
                let frames: Vec<&Vec<u32>> = idx.iter().map(|&i| &grid[i]).collect();
                let mut sums = vec![0u32; k];
                let mut votes = vec![0u32; k];
                for f in &frames {
                    f.iter().enumerate().for_each(|(c, &v)| sums[c] += v);
                    votes[first_max(f)] += 1;
                }
                let per_frame: Vec<Vec<f64>> =
                    frames.iter().map(|f| f.iter().map(|&v| v as f64 * 0.25).collect()).collect();
                let set = PredictionSet::new("oracle", per_frame).unwrap();
                if decide(&aggregate(&set, AggregationRule::SumRule)) != first_max(&sums) {
                    bad += 1;
                }
                if decide(&aggregate(&set, AggregationRule::MajorityVote)) != first_max(&votes) {
                    bad += 1;
                }
                checked += 1;

                let mut pos = 0;
                loop {
                    if pos == s {
                        break;
                    }
                    idx[pos] += 1;
                    if idx[pos] < grid.len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if pos == s {
                    break;
                }
            }
        }
    }
    (checked, bad)
}

/// Writes a small dataset in the metadata layout: `per_fold` clips of
/// `seconds` in each fold, classes cycling so every fold mixes classes.
pub fn tiny_dataset(root: &std::path::Path, per_fold: usize, seconds: f64, seed: u64) {
    use esc1d::audio::{encode_wav_pcm16, Waveform};
    use esc1d::harness::{synth_clip, CLASS_NAMES};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut csv = String::from("slice_file_name,fsID,start,end,salience,fold,classID,class\n");
    let n = (seconds * 16_000.0) as usize;
    for fold in 1..=10usize {
        let dir = root.join("audio").join(format!("fold{fold}"));
        std::fs::create_dir_all(&dir).unwrap();
        for i in 0..per_fold {
            let class = (fold + i) % 10;
            let clip = synth_clip(class, &mut rng).unwrap();
            let w = Waveform::new(clip.samples()[..n].to_vec(), 16_000).unwrap();
            let name = format!("t{fold}-{i}.wav");
            std::fs::write(dir.join(&name), encode_wav_pcm16(&w)).unwrap();
            csv.push_str(&format!("{name},0,0,{seconds},1,{fold},{class},{}\n", CLASS_NAMES[class]));
        }
    }
    std::fs::create_dir_all(root.join("metadata")).unwrap();
    std::fs::write(root.join("metadata").join("UrbanSound8K.csv"), csv).unwrap();
}
