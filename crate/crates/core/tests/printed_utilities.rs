//! Feeds the published scenario utility vectors straight into the robust LP
//! layer, bypassing the attacker subgames. Breach probabilities are recovered
//! by inverting the per-algorithm utility formula.

use crypto_stackelberg::defender::defender_polytope;
use crypto_stackelberg::lp::{solve_lp, Relation, Sense};
use crypto_stackelberg::model::GameInstance;
use crypto_stackelberg::robust::{
    breach_regret_matrix, opt_label, regret_matrix, solve_minimax_regret, ScenarioSet,
    ScenarioTable,
};
use crypto_stackelberg::scenario::paper_dataset;

const UTILITIES: [[f64; 8]; 5] = [
    [
        11.5275, 93.5418, 4.2352, 105.938, 81.605, -1456.808, 16.373, 46.406,
    ],
    [
        11.5275, -0.5082, 4.2352, 105.938, -30.395, -1456.808, 16.373, 46.406,
    ],
    [
        1.3275, -0.5082, 4.2352, 105.938, -30.395, -1479.308, 16.373, 46.406,
    ],
    [
        1.3275, -0.5082, 4.2352, -17.812, -49.995, -1479.308, 16.373, 46.406,
    ],
    [
        1.3275, -0.5082, 4.2352, -17.812, -49.995, -1490.308, 16.373, 46.406,
    ],
];

fn breach_from_utility(instance: &GameInstance, utilities: &[f64]) -> Vec<f64> {
    let w = &instance.weights;
    instance
        .algorithms
        .iter()
        .zip(utilities)
        .map(|(a, l)| {
            let fixed =
                w.op * a.op_cost + w.cpu * a.cpu_cost + w.mem * a.mem_cost + w.latency * a.latency
                    - w.resilience * a.resilience;
            1.0 - (l + fixed) / a.protected_value
        })
        .collect()
}

fn printed_table() -> (GameInstance, ScenarioTable) {
    let data = paper_dataset();
    let inst = data.instance;
    let utilities: Vec<Vec<f64>> = UTILITIES.iter().map(|r| r.to_vec()).collect();
    let breach = utilities
        .iter()
        .map(|u| breach_from_utility(&inst, u))
        .collect();
    let set = ScenarioSet::new(vec![11.0, 15.0, 20.0, 25.0, 30.0]).unwrap();
    let table = ScenarioTable::from_utilities(&inst, &set, utilities, breach).unwrap();
    (inst, table)
}

fn assert_close(label: &str, got: f64, want: f64, tol: f64) {
    assert!(
        (got - want).abs() <= tol,
        "{label}: got {got}, expected {want} +/- {tol}"
    );
}

#[test]
fn recovered_breach_matches_the_equilibrium_column() {
    let (inst, _) = printed_table();
    // At k = 30 every algorithm except AES-128 faces the same plan as at k = 40.
    let b = breach_from_utility(&inst, &UTILITIES[4]);
    let expected = [0.970, 0.990, 0.950, 0.990, 0.940, 0.835, 0.450, 0.400];
    for (got, want) in b.iter().zip(expected) {
        assert_close("breach", *got, want, 1e-3);
    }
}

#[test]
fn scenario_optima() {
    let (_, table) = printed_table();
    for (got, want) in table
        .optima
        .iter()
        .zip([70.154, 54.054, 53.997, 19.122, 19.122])
    {
        assert_close("V*", *got, want, 1e-3);
    }
}

#[test]
fn minimax_regret_strategy_and_regrets() {
    let (inst, table) = printed_table();
    let mmr = solve_minimax_regret(&inst, &table).unwrap();
    let expected = [0.0, 0.171190, 0.0, 0.282278, 0.0, 0.0, 0.146531, 0.400000];
    for (got, want) in mmr.strategy.probs.iter().zip(expected) {
        assert_close("p_mmr", *got, want, 1e-3);
    }
    assert_close("max regret", mmr.max_regret, 3.2750, 1e-3);
    for (got, want) in mmr
        .per_scenario_regret
        .iter()
        .zip([3.2750, 3.2750, 3.2188, 3.2750, 3.2750])
    {
        assert_close("regret", *got, want, 1e-3);
    }
}

#[test]
fn regret_matrix_cells() {
    let (inst, table) = printed_table();
    let mmr = solve_minimax_regret(&inst, &table).unwrap();
    let m = regret_matrix(&table, &[("mmr".into(), mmr.strategy)]);
    let expected: [(f64, [f64; 5]); 5] = [
        (11.0, [0.0, 2.7095, 2.6533, 4.1628, 4.1628]),
        (15.0, [16.1005, 0.0, 1.9381, 3.9105, 3.9105]),
        (20.0, [16.1567, 0.0562, 0.0, 2.1951, 2.1951]),
        (25.0, [26.2824, 10.1819, 10.1257, 0.0, 0.0]),
        (30.0, [26.2824, 10.1819, 10.1257, 0.0, 0.0]),
    ];
    for (k, cells) in expected {
        let row = m.row(&opt_label(k)).unwrap();
        for (got, want) in row.cells.iter().zip(cells) {
            assert_close(&opt_label(k), *got, want, 1e-2);
        }
    }
    assert_close("mmr row max", m.row("mmr").unwrap().max, 3.2750, 1e-3);
}

#[test]
fn breach_of_scenario_optima_is_determined() {
    let (inst, table) = printed_table();
    // Each scenario LP has a single optimal point, so B* follows from the
    // utility vectors alone.
    for s in 0..table.scenario_count() {
        for sense in [Sense::Minimize, Sense::Maximize] {
            let mut lp = defender_polytope(&inst, sense, table.breach[s].clone());
            lp.constrain(
                "optimal-face",
                table.utilities[s].clone(),
                Relation::Ge,
                table.optima[s] - 1e-6,
            );
            let sol = solve_lp(&lp).unwrap();
            assert_close(
                "breach over optimal face",
                sol.objective_value,
                table.optimal_breach[s],
                1e-6,
            );
        }
    }
    assert_close("B* at k=11", table.optimal_breach[0], 0.2077, 1e-3);
    assert_close("B* at k=20", table.optimal_breach[2], 0.3454, 1e-3);
    // k=25 and k=30 share the k=40 equilibrium strategy and its 0.638 breach.
    assert_close("B* at k=25", table.optimal_breach[3], 0.638, 1e-3);
    assert_close("B* at k=30", table.optimal_breach[4], 0.638, 1e-3);
}

#[test]
fn breach_regret_rows_at_determined_columns() {
    let (inst, table) = printed_table();
    let mmr = solve_minimax_regret(&inst, &table).unwrap();
    let m = breach_regret_matrix(&table, &[("mmr".into(), mmr.strategy)]);
    let mmr_row = m.row("mmr").unwrap();
    assert_close("mmr at k=11", mmr_row.cells[0], 0.0182, 1e-3);
    assert_close("mmr at k=20", mmr_row.cells[2], 0.0500, 1e-3);
    assert_close("mmr max", mmr_row.max, 0.0500, 1e-3);
    let expected = [
        (15.0, 0, 0.1688),
        (15.0, 2, 0.0545),
        (20.0, 0, 0.1377),
        (25.0, 0, 0.2323),
        (25.0, 2, 0.0946),
        (30.0, 2, 0.0946),
    ];
    for (k, col, want) in expected {
        assert_close(
            &opt_label(k),
            m.row(&opt_label(k)).unwrap().cells[col],
            want,
            1e-3,
        );
    }
}
