//! Ready-to-run specifications for the standard worked cases.

use serde_json::{json, Value};

/// `1/(2πi)`, the second diagonal entry of the normalized basis in the log-system example.
const INV_TWO_PI_I: [f64; 2] = [0.0, -0.15915494309189535];

/// `(file stem, specification)` pairs.
pub fn all() -> Vec<(&'static str, Value)> {
    vec![
        (
            "hypergeometric_monodromy",
            json!({
                "equation": { "hypergeometric": { "a": 0.3, "b": 0.7, "c": 0.4 } },
                "task": "monodromy",
                "basis": "frobenius-at-0",
                "centers": [0.0],
                "numerics": { "tol": 1e-12 }
            }),
        ),
        (
            "log_system_cocycle",
            json!({
                "equation": { "system": { "entries": [
                    [[0.0], [1.0]],
                    [[0.0], { "num": [-1.0], "den": [0.0, 1.0] }]
                ] } },
                "perturbation": {
                    "kind": "meromorphic",
                    "H": [
                        [{ "num": [1.0], "den": [0.0, 1.0] }, { "num": [1.0], "den": [0.0, 1.0] }],
                        [[0.0], { "num": [1.0], "den": [0.0, 1.0] }]
                    ]
                },
                "task": "cocycle",
                "basepoint": 1.0,
                "basis": { "custom": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], INV_TWO_PI_I]] },
                "centers": [0.0],
                "numerics": { "tol": 1e-11 }
            }),
        ),
        (
            "trivial_deformation",
            json!({
                "equation": { "hypergeometric": { "a": 0.3, "b": 0.7, "c": 0.4 } },
                "perturbation": {
                    "kind": "meromorphic",
                    "H": [[[0.0], [0.0]], [{ "num": [1.0], "den": [0.0, 1.0, -1.0] }, [0.0]]]
                },
                "rho": 0.01,
                "task": "dyson",
                "basis": "frobenius-at-0",
                "paths": [{ "segments": [{ "line": [0.5, [0.5, 0.3]] }, { "line": [[0.5, 0.3], 0.8] }] }],
                "numerics": { "tol": 1e-12, "K": 3 }
            }),
        ),
        (
            "power_jump",
            json!({
                "equation": { "hypergeometric": { "a": 0.3, "b": 0.7, "c": 0.4 } },
                "perturbation": {
                    "kind": "power",
                    "lambda": 0.25,
                    "H": [[[0.0], [0.0]], [{ "num": [1.0], "den": [0.0, 1.0, -1.0] }, [0.0]]]
                },
                "task": "cocycle",
                "origin": "singular",
                "centers": [0.0],
                "numerics": { "tol": 1e-12 }
            }),
        ),
        (
            "eigenshift_density",
            json!({
                "equation": { "hypergeometric": { "a": 0.3, "b": 0.7, "c": 1.2 } },
                "task": "eigenshift",
                "f": "density"
            }),
        ),
        (
            "series_triangle",
            json!({
                "equation": { "hypergeometric": { "a": 0.3, "b": 0.7, "c": 0.4 } },
                "task": "series",
                "f": "one",
                "rho": 0.05,
                "basepoint": 0.3,
                "numerics": { "tol": 1e-12, "K": 3 }
            }),
        ),
        (
            "basis_samples",
            json!({
                "equation": { "hypergeometric": { "a": 0.3, "b": 0.7, "c": 1.2 } },
                "task": "sample"
            }),
        ),
    ]
}
