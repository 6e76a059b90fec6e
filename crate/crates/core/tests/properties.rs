use pdexplain::tabular::quantile_grid_of;
use pdexplain::{
    fit_forest, read_csv, BackgroundSet, ColumnSpec, CsvOptions, DataTable, Explainer,
    FeatureSubset, FnPredictor, ForestParams, Matrix, PdEngine, Predictor, Result, Schema,
};
use proptest::prelude::*;
use rayon::ThreadPoolBuilder;

#[derive(Debug, Clone)]
struct Case {
    n: usize,
    p: usize,
    values: Vec<f64>,
    subset: Vec<usize>,
    coef: Vec<f64>,
    background: usize,
    seed: u64,
}

fn case() -> impl Strategy<Value = Case> {
    (2usize..=30, 1usize..=5)
        .prop_flat_map(|(n, p)| {
            (
                Just(n),
                Just(p),
                prop::collection::vec((-20i32..=20).prop_map(|k| k as f64 * 0.25), n * p),
                prop::sample::subsequence((0..p).collect::<Vec<_>>(), 1..=p),
                prop::collection::vec(-3.0f64..3.0, p + 2),
                1usize..=n,
                any::<u64>(),
            )
        })
        .prop_map(|(n, p, values, subset, coef, background, seed)| Case {
            n,
            p,
            values,
            subset,
            coef,
            background,
            seed,
        })
}

impl Case {
    fn table(&self) -> DataTable {
        let schema = Schema::new(
            (0..self.p)
                .map(|j| ColumnSpec::numeric(format!("x{j}")))
                .collect(),
        )
        .unwrap();
        DataTable::new(
            schema,
            Matrix::new(self.n, self.p, self.values.clone()).unwrap(),
        )
        .unwrap()
    }

    fn subset(&self) -> FeatureSubset {
        FeatureSubset::new(self.subset.clone(), self.p).unwrap()
    }

    /// Linear terms, one interaction and a smooth nonlinearity.
    fn model(&self, schema: &Schema) -> impl Predictor + 'static {
        let c = self.coef.clone();
        let p = self.p;
        FnPredictor::new(schema.clone(), move |x: &[f64]| {
            let linear: f64 = x.iter().zip(&c[1..=p]).map(|(v, k)| v * k).sum();
            c[0] + linear + c[p + 1] * x[0] * x[p - 1] + 0.5 * x[0].sin()
        })
    }

    fn forest(&self, table: &DataTable) -> pdexplain::BaggedForest {
        let model = self.model(table.schema());
        let y = model.predict(table.matrix()).unwrap();
        let mut columns: Vec<(String, Vec<f64>)> = table
            .schema()
            .names()
            .enumerate()
            .map(|(j, name)| (name.to_string(), table.column(j)))
            .collect();
        columns.push(("y".into(), y));
        let data = DataTable::from_columns(columns).unwrap();
        let params = ForestParams {
            trees: 4,
            min_leaf: 1,
            seed: self.seed,
            ..ForestParams::default()
        };
        fit_forest(&data, "y", &params).unwrap()
    }
}

/// Plain double loop over points and background rows.
fn brute_pd(model: &dyn Predictor, bg: &Matrix, subset: &[usize], point: &[f64]) -> f64 {
    let mut total = 0.0;
    for row in bg.rows() {
        let mut synthetic = row.to_vec();
        for (k, &s) in subset.iter().enumerate() {
            synthetic[s] = point[k];
        }
        let one = Matrix::from_rows(synthetic.len(), &[synthetic]).unwrap();
        total += model.predict(&one).unwrap()[0];
    }
    total / bg.nrows() as f64
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

struct Affine<P> {
    inner: P,
    scale: f64,
    shift: f64,
}

impl<P: Predictor> Predictor for Affine<P> {
    fn features(&self) -> &Schema {
        self.inner.features()
    }
    fn predict(&self, rows: &Matrix) -> Result<Vec<f64>> {
        Ok(self
            .inner
            .predict(rows)?
            .into_iter()
            .map(|v| self.scale * v + self.shift)
            .collect())
    }
}

struct Sum<A, B>(A, B);

impl<A: Predictor, B: Predictor> Predictor for Sum<A, B> {
    fn features(&self) -> &Schema {
        self.0.features()
    }
    fn predict(&self, rows: &Matrix) -> Result<Vec<f64>> {
        let a = self.0.predict(rows)?;
        let b = self.1.predict(rows)?;
        Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn generic_engine_matches_double_loop(c in case()) {
        let table = c.table();
        let model = c.model(table.schema());
        let bg = BackgroundSet::subsample(&table, c.background, c.seed).unwrap();
        let subset = c.subset();
        let pd = PdEngine::generic()
            .with_batch_rows(7)
            .pd_at_observations(&model, &bg, &subset)
            .unwrap();
        for (point, value) in pd.points.iter().zip(&pd.values) {
            let expect = if subset.is_full(c.p) {
                brute_pd(&model, &Matrix::from_rows(c.p, &[vec![0.0; c.p]]).unwrap(), &c.subset, point)
            } else {
                brute_pd(&model, bg.rows(), &c.subset, point)
            };
            prop_assert!(close(*value, expect, 1e-12), "{value} vs {expect}");
        }
    }

    #[test]
    fn forest_fast_path_matches_double_loop(c in case()) {
        let table = c.table();
        let forest = c.forest(&table);
        let bg = BackgroundSet::subsample(&table, c.background, c.seed).unwrap();
        let subset = c.subset();
        let points = Matrix::from_rows(
            subset.len(),
            &table.matrix().rows().map(|r| c.subset.iter().map(|&j| r[j]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        ).unwrap();
        let fast = PdEngine::default().pd_at_points(&forest, &bg, &subset, &points).unwrap();
        let generic = PdEngine::generic().pd_at_points(&forest, &bg, &subset, &points).unwrap();
        for (i, point) in points.rows().enumerate() {
            let expect = brute_pd(&forest, bg.rows(), &c.subset, point);
            prop_assert!(close(fast.values[i], expect, 1e-12), "{} vs {expect}", fast.values[i]);
            prop_assert!(close(generic.values[i], expect, 1e-12), "{} vs {expect}", generic.values[i]);
        }
    }

    #[test]
    fn pd_is_linear_in_the_model(c in case(), alpha in -4.0f64..4.0) {
        let table = c.table();
        let f = c.model(table.schema());
        let g = FnPredictor::new(table.schema().clone(), |x: &[f64]| x.iter().map(|v| v * v).sum());
        let bg = BackgroundSet::subsample(&table, c.background, c.seed).unwrap();
        let subset = c.subset();
        let engine = PdEngine::default();
        let pd_f = engine.pd_at_observations(&f, &bg, &subset).unwrap().values;
        let pd_g = engine.pd_at_observations(&g, &bg, &subset).unwrap().values;
        let sum = Sum(c.model(table.schema()), FnPredictor::new(table.schema().clone(), |x: &[f64]| x.iter().map(|v| v * v).sum()));
        let pd_sum = engine.pd_at_observations(&sum, &bg, &subset).unwrap().values;
        let scaled = Affine { inner: c.model(table.schema()), scale: alpha, shift: 0.0 };
        let pd_scaled = engine.pd_at_observations(&scaled, &bg, &subset).unwrap().values;
        for i in 0..c.n {
            prop_assert!(close(pd_sum[i], pd_f[i] + pd_g[i], 1e-12));
            prop_assert!(close(pd_scaled[i], alpha * pd_f[i], 1e-12));
        }
    }

    #[test]
    fn upsilon_bounds_and_affine_invariance(
        c in case(),
        scale in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
        shift in -50.0f64..50.0,
    ) {
        let table = c.table();
        let model = c.model(table.schema());
        let bg = BackgroundSet::subsample(&table, c.background, c.seed).unwrap();
        let Ok(explainer) = Explainer::new(&model, bg.clone(), PdEngine::default()) else {
            return Ok(());
        };
        prop_assume!(explainer.ase_null() > 1e-8);
        let full = explainer.upsilon(&FeatureSubset::full(c.p)).unwrap().upsilon;
        prop_assert!((full - 1.0).abs() <= 1e-9);
        let subset = c.subset();
        let u = explainer.upsilon(&subset).unwrap().upsilon;
        prop_assert!(u <= 1.0 + 1e-12);

        let affine = Affine { inner: c.model(table.schema()), scale, shift };
        let ua = Explainer::new(&affine, bg, PdEngine::default())
            .unwrap()
            .upsilon(&subset)
            .unwrap()
            .upsilon;
        prop_assert!((u - ua).abs() <= 1e-9, "{u} vs {ua}");
    }

    #[test]
    fn results_identical_across_thread_counts(c in case()) {
        let table = c.table();
        let model = c.model(table.schema());
        let subset = c.subset();
        let run = |threads: usize| {
            in_pool(threads, || {
                let forest = c.forest(&table);
                let bg = BackgroundSet::subsample(&table, c.background, c.seed).unwrap();
                let engine = PdEngine::default().with_batch_rows(5);
                let a = engine.pd_at_observations(&forest, &bg, &subset).unwrap().values;
                let b = engine.pd_at_observations(&model, &bg, &subset).unwrap().values;
                let f = forest.predict(table.matrix()).unwrap();
                (bits(&a), bits(&b), bits(&f))
            })
        };
        let one = run(1);
        prop_assert_eq!(&one, &run(2));
        prop_assert_eq!(&one, &run(8));
    }

    #[test]
    fn csv_round_trip_is_exact(
        rows in prop::collection::vec(
            (prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 0usize..3),
            1..30,
        ),
    ) {
        let levels = ["lo", "mid", "hi"];
        let schema = Schema::new(vec![
            ColumnSpec::numeric("x"),
            ColumnSpec::categorical("c", levels),
        ]).unwrap();
        let values: Vec<[f64; 2]> = rows.iter().map(|&(x, c)| [x, c as f64]).collect();
        let table = DataTable::new(schema, Matrix::from_rows(2, &values).unwrap()).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let back = read_csv(buf.as_slice(), &CsvOptions::default()).unwrap().table;
        prop_assert_eq!(back.n(), rows.len());
        let back_levels = &back.schema().column(1).levels;
        for (i, &(x, c)) in rows.iter().enumerate() {
            prop_assert_eq!(back.row(i)[0].to_bits(), x.to_bits());
            prop_assert_eq!(back_levels[back.row(i)[1] as usize].as_str(), levels[c]);
        }
    }

    #[test]
    fn quantile_grid_strictly_increasing(
        values in prop::collection::vec(-1e6f64..1e6, 1..80),
        g in 2usize..60,
    ) {
        let grid = quantile_grid_of(&values, g).unwrap();
        prop_assert!(!grid.is_empty() && grid.len() <= g);
        prop_assert!(grid.windows(2).all(|w| w[0] < w[1]));
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(grid[0], lo);
        prop_assert_eq!(*grid.last().unwrap(), hi);
    }
}
