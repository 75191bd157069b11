//! Command-level behavior: byte-stable output for identical configs, the
//! machine-readable record stream, and the geometry grammar end to end.

use hcops::cli::{run, Cli, Command, OutputFormat};
use hcops::ncalgebra::OperatorTermRecord;

fn capture(command: Command, format: OutputFormat) -> (bool, Vec<u8>) {
    let cli = Cli {
        format,
        precision: 30,
        jobs: 0,
        command,
    };
    let mut out = Vec::new();
    let pass = run(&cli, &mut out).expect("command runs");
    (pass, out)
}

#[test]
fn identical_configs_produce_identical_bytes() {
    let make = || Command::VerifyTu {
        max_n: 6,
        vectorial_n: 4,
        cross_n: 3,
    };
    let (pass1, first) = capture(make(), OutputFormat::Table);
    let (pass2, second) = capture(make(), OutputFormat::Table);
    assert!(pass1 && pass2);
    assert_eq!(first, second);

    let (_, first) = capture(
        Command::SpectralCheck { dump_samples: None },
        OutputFormat::Records,
    );
    let (_, second) = capture(
        Command::SpectralCheck { dump_samples: None },
        OutputFormat::Records,
    );
    assert_eq!(first, second);
}

#[test]
fn operator_records_are_machine_readable() {
    let (_, out) = capture(
        Command::EmitOperators { max_order: 6 },
        OutputFormat::Records,
    );
    let lines: Vec<&[u8]> = out
        .split(|&b| b == b'\n')
        .filter(|l| !l.is_empty())
        .collect();
    assert_eq!(lines.len(), 6);
    #[derive(serde::Deserialize)]
    struct Record {
        operator: String,
        terms: Vec<OperatorTermRecord>,
    }
    let d6: Record = serde_json::from_slice(lines[5]).unwrap();
    assert_eq!(d6.operator, "D_6");
    assert_eq!(d6.terms.len(), 7);
    assert!(d6.terms.iter().all(|t| t.coefficient.half_pi_power == 0));
}

#[test]
fn flow_coeffs_exact_geometry_is_exact_text() {
    let (pass, out) = capture(
        Command::FlowCoeffs {
            geometry: "ball:3:7/3".into(),
            max_power: 6,
        },
        OutputFormat::Table,
    );
    assert!(pass);
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("t^(0/2): -3/7"), "{text}");
    for k in 1..=6 {
        assert!(text.contains(&format!("t^({k}/2): 0")), "{text}");
    }
}

#[test]
fn sample_dumps_are_plain_text_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cli = Cli {
        format: OutputFormat::Records,
        precision: 30,
        jobs: 0,
        command: Command::SpectralCheck {
            dump_samples: Some(dir.path().to_path_buf()),
        },
    };
    let mut out = Vec::new();
    assert!(run(&cli, &mut out).expect("command runs"));
    let table = std::fs::read_to_string(dir.path().join("flow_ball3_r1.txt")).unwrap();
    let mut lines = table.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    // 24 grid points, two columns each.
    assert_eq!(lines.clone().count(), 24);
    for line in lines {
        let cols: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(cols.len(), 2);
        cols[0].parse::<f64>().unwrap();
        cols[1].parse::<f64>().unwrap();
    }
}

#[test]
fn bad_geometry_is_a_structured_error() {
    let cli = Cli {
        format: OutputFormat::Table,
        precision: 30,
        jobs: 0,
        command: Command::FlowCoeffs {
            geometry: "ball:3:-1".into(),
            max_power: 2,
        },
    };
    let mut out = Vec::new();
    let err = run(&cli, &mut out).unwrap_err();
    let message = err.to_string();
    assert!(message.contains("positive"), "{message}");
}

#[test]
fn flow_coeffs_float_geometries_run() {
    for spec in ["cap:3:pi/4", "hyperbolic:3:1.5", "interval"] {
        let (pass, out) = capture(
            Command::FlowCoeffs {
                geometry: spec.into(),
                max_power: 4,
            },
            OutputFormat::Records,
        );
        assert!(pass, "{spec}");
        let lines = out.split(|&b| b == b'\n').filter(|l| !l.is_empty()).count();
        // leading term plus powers 0..=4
        assert_eq!(lines, 6, "{spec}");
    }
}
