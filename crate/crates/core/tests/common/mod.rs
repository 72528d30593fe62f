//! Independent reference computations used as test oracles. None of these
//! call into the library's numerical code.

#![allow(dead_code)]

use attrition::dataio::{
    encode, generate_synthetic, Cohort, DesignMatrix, Effect, EncodingSpec, FieldEncoding, NumericField,
    CategoricalField, SyntheticConfig,
};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Log partial likelihood and gradient by walking every risk set directly.
pub fn brute_force_pll(x: &[Vec<f64>], t: &[u32], e: &[bool], beta: &[f64]) -> (f64, Vec<f64>) {
    let p = beta.len();
    let mut ll = 0.0;
    let mut grad = vec![0.0; p];
    for i in 0..x.len() {
        if !e[i] {
            continue;
        }
        let mut denom = 0.0;
        let mut weighted = vec![0.0; p];
        for j in 0..x.len() {
            if t[j] >= t[i] {
                let w = dot(beta, &x[j]).exp();
                denom += w;
                for k in 0..p {
                    weighted[k] += w * x[j][k];
                }
            }
        }
        ll += dot(beta, &x[i]) - denom.ln();
        for k in 0..p {
            grad[k] += x[i][k] - weighted[k] / denom;
        }
    }
    (ll, grad)
}

/// Solves a dense square system by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// `[intercept, weights...]` from the normal equations `(AᵀA) w = Aᵀy`.
pub fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = x[0].len() + 1;
    let rows: Vec<Vec<f64>> = x
        .iter()
        .map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect())
        .collect();
    let mut ata = vec![vec![0.0; p]; p];
    let mut aty = vec![0.0; p];
    for (r, yi) in rows.iter().zip(y) {
        for i in 0..p {
            aty[i] += r[i] * yi;
            for j in 0..p {
                ata[i][j] += r[i] * r[j];
            }
        }
    }
    gauss_solve(ata, aty)
}

/// Dual of bias-augmented ε-SVR solved as a 2n-variable box QP,
///
///   min ½ (a − a*)ᵀ Q (a − a*) − yᵀ(a − a*) + ε Σ (a + a*),  0 ≤ a, a* ≤ C,
///
/// by accelerated projected gradient with adaptive restart. Returns
/// `(a − a*, dual objective in maximization form)`.
pub fn svr_dual_qp(x: &[Vec<f64>], y: &[f64], epsilon: f64, cost: f64) -> (Vec<f64>, f64) {
    let n = x.len();
    let aug: Vec<Vec<f64>> = x
        .iter()
        .map(|r| r.iter().copied().chain(std::iter::once(1.0)).collect())
        .collect();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| dot(&aug[i], &aug[j])).collect())
        .collect();
    // Gradient of the 2n problem is [Qβ − y + ε, −(Qβ − y) + ε]; its
    // Lipschitz constant is 2·λmax(Q) ≤ 2·trace(Q).
    let lipschitz = 2.0 * (0..n).map(|i| q[i][i]).sum::<f64>();
    let objective = |z: &[f64]| {
        let beta: Vec<f64> = (0..n).map(|i| z[i] - z[n + i]).collect();
        let quad: f64 = (0..n).map(|i| beta[i] * dot(&q[i], &beta)).sum::<f64>() * 0.5;
        quad - dot(y, &beta) + epsilon * z.iter().sum::<f64>()
    };
    let project = |v: f64| v.clamp(0.0, cost);

    let mut z = vec![0.0; 2 * n];
    let mut yk = z.clone();
    let mut tk = 1.0f64;
    let mut f_prev = objective(&z);
    for _ in 0..400_000 {
        let beta: Vec<f64> = (0..n).map(|i| yk[i] - yk[n + i]).collect();
        let g: Vec<f64> = (0..n).map(|i| dot(&q[i], &beta) - y[i]).collect();
        let next: Vec<f64> = (0..2 * n)
            .map(|k| {
                let grad = if k < n { g[k] + epsilon } else { -g[k - n] + epsilon };
                project(yk[k] - grad / lipschitz)
            })
            .collect();
        let f_next = objective(&next);
        if f_next > f_prev {
            // Restart momentum when the objective goes up.
            yk = z.clone();
            tk = 1.0;
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * tk * tk).sqrt()) / 2.0;
        yk = (0..2 * n)
            .map(|k| next[k] + (tk - 1.0) / t_next * (next[k] - z[k]))
            .collect();
        z = next;
        tk = t_next;
        f_prev = f_next;
    }
    let beta: Vec<f64> = (0..n).map(|i| z[i] - z[n + i]).collect();
    (beta, -f_prev)
}

pub fn design(x: &[Vec<f64>], t: &[u32], e: &[bool]) -> DesignMatrix {
    DesignMatrix::from_rows(x, t, e).unwrap()
}

/// Encoding with exactly the given numeric fields (standardized) followed by
/// a gender indicator for `F`.
pub fn recovery_spec(numeric: &[NumericField]) -> EncodingSpec {
    let mut fields: Vec<FieldEncoding> = numeric
        .iter()
        .map(|&field| FieldEncoding::Numeric {
            field,
            standardize: true,
        })
        .collect();
    fields.push(FieldEncoding::Categorical {
        field: CategoricalField::Gender,
        levels: vec!["F".into(), "M".into()],
        reference: "M".into(),
    });
    EncodingSpec::new(fields).unwrap()
}

/// Synthetic cohort with true β = (0.8, −0.5, 0, 0.3) on
/// (hs_gpa, math_score, reading_score, gender=F), about 20% censored.
///
/// Fine time resolution (80 periods with a low constant hazard) keeps ties
/// light enough for the Breslow estimate to be nearly unbiased.
pub fn recovery_data() -> (Cohort, DesignMatrix, Vec<f64>) {
    let effect = |term: &str, coefficient| Effect {
        term: term.into(),
        coefficient,
    };
    let config = SyntheticConfig {
        n_students: 5000,
        horizon: 80,
        baseline_hazard: vec![0.025; 80],
        effects: vec![
            effect("hs_gpa", 0.8),
            effect("math_score", -0.5),
            effect("reading_score", 0.0),
            effect("gender=F", 0.3),
        ],
        censor_rate: 0.08,
        seed: 7,
    };
    let cohort = generate_synthetic(&config).unwrap();
    let spec = recovery_spec(&[NumericField::HsGpa, NumericField::MathScore, NumericField::ReadingScore]);
    let data = encode(&cohort, &spec).unwrap();
    (cohort, data, config.true_beta())
}
