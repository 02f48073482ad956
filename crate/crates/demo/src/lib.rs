//! Browser demo: three views backed by the core crate, each returning a JSON
//! string for the static page in `www/`.
//!
//! The logic lives in [`api`] so it is testable natively; the
//! `wasm_bindgen` wrappers only translate errors.

pub mod api {
    use ecqp::asqp::{fu_bound, g_of};
    use ecqp::bounds::bound_values;
    use ecqp::model::{random_instance, InstanceSpec};
    use ecqp::oracle::{best_feasible_search, Budget};
    use ecqp::pipeline::{build_report, run_pipeline, CheckTolerances, PipelineOptions};
    use ecqp::rounding::max_step;
    use serde::Serialize;

    /// Dimension used for the bound curves; large enough that `r̃ = r0`.
    const CURVE_DIM: usize = 100_000;
    const BOUNDARY_POINTS: usize = 180;
    const GRID: usize = 48;

    #[derive(Serialize)]
    struct CurveRow {
        m: usize,
        r0: usize,
        tseng: f64,
        new_ratio: f64,
        nv: f64,
        nv_improved: f64,
        ye_improved: f64,
    }

    /// Closed-form ratios for `m = 1..=m_max` at the given `γ`.
    pub fn bound_curves(m_max: usize, gamma: f64) -> Result<String, String> {
        if !(1..=10_000).contains(&m_max) {
            return Err(format!("m_max must lie in 1..=10000, got {m_max}"));
        }
        let rows = (1..=m_max)
            .map(|m| {
                bound_values(m, CURVE_DIM, gamma, &[CURVE_DIM]).map(|r| CurveRow {
                    m,
                    r0: r.r0,
                    tseng: r.tseng,
                    new_ratio: r.new_ratio,
                    nv: r.nv,
                    nv_improved: r.nv_improved,
                    ye_improved: r.ye_improved,
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        Ok(ecqp::json::to_string(&rows))
    }

    #[derive(Serialize)]
    struct Ellipse {
        /// Boundary sampled along rays from the origin; `null` where the
        /// ellipsoid is unbounded in that direction.
        boundary: Vec<Option<[f64; 2]>>,
    }

    #[derive(Serialize)]
    struct PlaneSolve {
        a: [[f64; 2]; 2],
        b: [f64; 2],
        gamma: f64,
        ellipses: Vec<Ellipse>,
        /// Half-width of the square view centred at the origin.
        extent: f64,
        /// Objective on a `grid × grid` lattice over the view, row-major from
        /// the bottom-left corner.
        grid: usize,
        values: Vec<f64>,
        x: [f64; 2],
        x_bar: [f64; 2],
        tau: f64,
        v_sdp: f64,
        f_x: f64,
        ratio: f64,
        bound: f64,
        oracle: f64,
        oracle_point: [f64; 2],
        rank_before: usize,
        rank_after: usize,
        pass: bool,
    }

    fn pair(v: &[f64]) -> [f64; 2] {
        [v[0], v[1]]
    }

    /// Seeded two-dimensional instance run through the whole pipeline, with
    /// everything the page needs to draw it.
    pub fn solve_plane(seed: u64, m: usize, gamma_max: f64) -> Result<String, String> {
        if !(1..=12).contains(&m) {
            return Err(format!("m must lie in 1..=12, got {m}"));
        }
        let spec = InstanceSpec {
            gamma_max,
            ..InstanceSpec::default()
        };
        let inst = random_instance(seed, 2, m, &spec).map_err(|e| e.to_string())?;
        let run = run_pipeline(&inst, &PipelineOptions::default()).map_err(|e| e.to_string())?;
        let oracle = best_feasible_search(&inst, seed, Budget { starts: 40, iters: 300 });
        let report = build_report(&inst, &run, Some(oracle.clone()), false, &CheckTolerances::default());

        let rays: Vec<[f64; 2]> = (0..BOUNDARY_POINTS)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / BOUNDARY_POINTS as f64;
                [t.cos(), t.sin()]
            })
            .collect();
        let feasible_reach = rays
            .iter()
            .map(|d| max_step(d, &inst.ellipsoids))
            .filter(|s| s.is_finite())
            .fold(0.0, f64::max);
        let cert = &run.rounding.certificate;
        let extent = 1.25
            * feasible_reach
                .max(cert.x_bar[0].abs())
                .max(cert.x_bar[1].abs())
                .max(1e-3);
        let ellipses = inst
            .ellipsoids
            .iter()
            .map(|e| Ellipse {
                boundary: rays
                    .iter()
                    .map(|d| {
                        let s = max_step(d, std::slice::from_ref(e));
                        (s.is_finite() && s <= 4.0 * extent).then(|| [s * d[0], s * d[1]])
                    })
                    .collect(),
            })
            .collect();
        let mut values = Vec::with_capacity(GRID * GRID);
        for i in 0..GRID {
            for j in 0..GRID {
                let p = [
                    -extent + 2.0 * extent * (j as f64 + 0.5) / GRID as f64,
                    -extent + 2.0 * extent * (i as f64 + 0.5) / GRID as f64,
                ];
                values.push(inst.objective(&p));
            }
        }
        let out = PlaneSolve {
            a: [[inst.a.get(0, 0), inst.a.get(0, 1)], [inst.a.get(1, 0), inst.a.get(1, 1)]],
            b: pair(&inst.b),
            gamma: inst.gamma(),
            ellipses,
            extent,
            grid: GRID,
            values,
            x: pair(&cert.x),
            x_bar: pair(&cert.x_bar),
            tau: cert.tau_bar,
            v_sdp: cert.v_sdp,
            f_x: cert.f_x,
            ratio: cert.ratio,
            bound: cert.bound,
            oracle: oracle.best_value,
            oracle_point: pair(&oracle.best_point),
            rank_before: report.rank_before,
            rank_after: report.rank_after,
            pass: report.pass,
        };
        Ok(ecqp::json::to_string(&out))
    }

    #[derive(Serialize)]
    struct QualityRow {
        n: usize,
        g: f64,
        one_minus_g: f64,
        fu_bound: f64,
        cubic: f64,
    }

    /// `g(n)` against `1/n³`, and `1 − g(n)` against the older bound, for
    /// `n = 2..=n_max`.
    pub fn asqp_quality(n_max: usize) -> Result<String, String> {
        if !(2..=10_000).contains(&n_max) {
            return Err(format!("n_max must lie in 2..=10000, got {n_max}"));
        }
        let rows: Vec<QualityRow> = (2..=n_max)
            .map(|n| {
                let g = g_of(n);
                QualityRow {
                    n,
                    g,
                    one_minus_g: 1.0 - g,
                    fu_bound: fu_bound(n),
                    cubic: 1.0 / (n as f64).powi(3),
                }
            })
            .collect();
        Ok(ecqp::json::to_string(&rows))
    }
}

#[cfg(target_arch = "wasm32")]
mod bindings {
    use wasm_bindgen::prelude::*;

    #[wasm_bindgen]
    pub fn bound_curves(m_max: u32, gamma: f64) -> Result<String, JsError> {
        super::api::bound_curves(m_max as usize, gamma).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen]
    pub fn solve_plane(seed: u32, m: u32, gamma_max: f64) -> Result<String, JsError> {
        super::api::solve_plane(u64::from(seed), m as usize, gamma_max).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen]
    pub fn asqp_quality(n_max: u32) -> Result<String, JsError> {
        super::api::asqp_quality(n_max as usize).map_err(|e| JsError::new(&e))
    }
}
