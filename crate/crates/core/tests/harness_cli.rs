use std::path::Path;
use std::process::{Command, Output};

use sedplan::envs::tiger::ALICE;
use sedplan::envs::{Lever, TrampolineTiger};
use sedplan::game::chance_init;
use sedplan::harness::{
    self, compare, load_run, oracle_dump, parse_records, play_from, replay_return, ExperimentConfig, HarnessError,
    Mode, SummaryReport, OUT_DIR_VAR,
};
use sedplan::planner::PlanError;
use sedplan::{seed, NoopBlueprint, PlannerConfig, PlannerKind, ProtocolOptions};

fn sedplan(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sedplan"))
        .args(args)
        .current_dir(dir)
        .env_remove(OUT_DIR_VAR)
        .output()
        .unwrap()
}

fn tiger(mode: Mode, episodes: usize) -> ExperimentConfig {
    ExperimentConfig {
        planner: mode,
        episodes,
        ..ExperimentConfig::parse("").unwrap()
    }
}

#[test]
fn records_replay_and_summaries_recompute() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        out: Some(dir.path().join("run")),
        search: PlannerConfig {
            belief_samples: 50,
            rollout_samples: 10,
            ..tiger(Mode::ImprovisedE, 1).search
        },
        ..tiger(Mode::ImprovisedE, 30)
    };
    let (out, path) = harness::run_to_dir(&cfg).unwrap();
    let game = TrampolineTiger::default();
    let text = std::fs::read_to_string(path.join("episodes.jsonl")).unwrap();
    let records = parse_records(&text).unwrap();
    assert_eq!(records, out.records);
    for r in &records {
        assert_eq!(replay_return(&game, r).unwrap(), r.total_return, "seed {}", r.seed);
    }
    let written = SummaryReport::from_tsv(&std::fs::read_to_string(path.join("summary.tsv")).unwrap()).unwrap();
    let recomputed = SummaryReport::from_records("trampoline-tiger", "noop", "improvised-e", &records);
    assert_eq!(written, recomputed);
    assert_eq!(written.first_seed, Some(seed::episode_seed(0, 0)));

    let (summary, loaded) = load_run(&path).unwrap();
    assert_eq!(summary, Some(written));
    let same = compare(&loaded, &records).unwrap();
    assert_eq!(same.mean_delta, 0.0);
    assert_eq!((same.wins, same.losses, same.ties), (0, 0, 30));
}

#[test]
fn compare_needs_matching_seeds() {
    let a = harness::run_experiment(&tiger(Mode::Blueprint, 5)).unwrap().records;
    let b = harness::run_experiment(&ExperimentConfig {
        seed: 9,
        ..tiger(Mode::Blueprint, 5)
    })
    .unwrap()
    .records;
    assert!(matches!(compare(&a, &b), Err(HarnessError::MismatchedSeeds { only_a: 5, only_b: 5 })));
    assert!(matches!(compare(&a, &a[..4]), Err(HarnessError::MismatchedSeeds { only_a: 1, only_b: 0 })));
}

#[test]
fn bad_configs_fail_before_any_episode() {
    for text in [
        "episodes = 0",
        "planner = \"bogus\"",
        "search.eps_p = 1.5",
        "blueprint = \"scripted-hanabi\"",
        "tiger.p = 2.0",
        "unknown_key = 1",
        "seeds = \"finesse-complete\"",
    ] {
        let parsed = ExperimentConfig::parse(text);
        let err = match parsed {
            Err(e) => e,
            Ok(cfg) => {
                let mut ran = 0;
                let e = harness::run_experiment_with(&cfg, &mut |_| {
                    ran += 1;
                    Ok(())
                })
                .unwrap_err();
                assert_eq!(ran, 0, "{text}");
                e
            }
        };
        assert!(matches!(err, HarnessError::Config(_)), "{text}: {err}");
    }
}

#[test]
fn cli_config_errors_exit_with_code_two_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = sedplan(&["run", "--planner", "bogus", "--out", "x"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config"));
    let out = sedplan(&["run", "--eps-p", "1.5", "--out", "x"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("x").exists());
}

#[test]
fn cli_flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "planner = \"blueprint\"\nepisodes = 4\nseed = 5\n").unwrap();
    let out = sedplan(&["run", "--config", "c.toml", "--seed", "7", "--out", "r"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = SummaryReport::from_tsv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(summary.episodes, 4);
    assert_eq!(summary.planner, "blueprint");
    assert_eq!(summary.first_seed, Some(seed::episode_seed(7, 0)));
    let written = SummaryReport::from_tsv(&std::fs::read_to_string(dir.path().join("r/summary.tsv")).unwrap()).unwrap();
    assert_eq!(written, summary);
}

#[test]
fn cli_output_dir_defaults_to_the_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-env");
    let out = Command::new(env!("CARGO_BIN_EXE_sedplan"))
        .args(["run", "--planner", "blueprint", "--episodes", "2"])
        .current_dir(dir.path())
        .env(OUT_DIR_VAR, &target)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(target.join("episodes.jsonl").exists());
    assert!(target.join("summary.tsv").exists());
}

#[test]
fn cli_compare_of_two_runs() {
    let dir = tempfile::tempdir().unwrap();
    for (mode, name) in [("blueprint", "a"), ("exact-oracle", "b")] {
        let out = sedplan(&["run", "--planner", mode, "--episodes", "50", "--out", name], dir.path());
        assert!(out.status.success());
    }
    let out = sedplan(&["compare", "a", "b"], dir.path());
    assert!(out.status.success());
    let cmp = harness::compare_paths(&dir.path().join("a"), &dir.path().join("b")).unwrap();
    assert!(cmp.mean_delta > 0.0);
    assert_eq!(cmp.losses, 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), cmp.to_tsv());
}

#[test]
fn hanabi_oracle_is_too_large() {
    let cfg = ExperimentConfig {
        env: harness::EnvName::MiniHanabi,
        ..ExperimentConfig::parse("").unwrap()
    };
    let err = oracle_dump(&cfg, &[], false).unwrap_err();
    assert!(matches!(err, HarnessError::Plan(PlanError::TooLarge { .. })), "{err}");
}

#[test]
fn tiger_oracle_dump_lists_the_deviation() {
    let text = oracle_dump(&tiger(Mode::ExactOracle, 1), &[], true).unwrap();
    assert!(text.contains("D = {jump}"), "{text}");
    assert!(text.contains("R = {noop, pull}"), "{text}");
    assert!(text.contains("best jump,pull"), "{text}");
}

fn seed_with(lever: Lever) -> u64 {
    let g = TrampolineTiger::default();
    (0..)
        .find(|&s| chance_init(&g, seed::derive(s, seed::stream::CHANCE)).lever == lever)
        .unwrap()
}

struct Session {
    completed: bool,
    total: f64,
    text: String,
}

fn play(seat: usize, lever: Lever, input: &str) -> Session {
    let g = TrampolineTiger::default();
    let search = PlannerConfig::for_game(&g).exact();
    let options = ProtocolOptions::new(PlannerKind::ImprovisedE);
    let s = seed_with(lever);
    let mut out = Vec::new();
    let outcome = play_from::<_, _, f64, _, _>(
        &g,
        &NoopBlueprint,
        &search,
        &options,
        seat,
        g.world(lever),
        s,
        input.as_bytes(),
        &mut out,
    )
    .unwrap();
    Session {
        completed: outcome.completed,
        total: outcome.total_return,
        text: String::from_utf8(out).unwrap(),
    }
}

#[test]
fn human_bob_answers_a_jump() {
    let s = play(1, Lever::Trampoline, "1\n");
    assert!(s.completed);
    assert!(s.text.contains("p0 jump"), "{}", s.text);
    assert!(s.text.contains("[0] noop") && s.text.contains("[1] pull"), "{}", s.text);
    assert_eq!(s.total, 1.0);
    assert!(s.text.ends_with("return: 1\n"));

    let s = play(1, Lever::Trampoline, "pull\n");
    assert_eq!(s.total, 1.0);
}

#[test]
fn illegal_input_reprompts_and_eof_aborts() {
    let s = play(1, Lever::Trampoline, "7\nhop\n0\n");
    assert!(s.completed);
    assert!(s.text.contains("'7' is not a legal action"));
    assert!(s.text.contains("'hop' is not a legal action"));
    assert_eq!(s.total, -10.0);

    let s = play(1, Lever::Trampoline, "");
    assert!(!s.completed);
    assert!(s.text.contains("input closed, game aborted"));
}

#[test]
fn human_alice_and_agent_bob() {
    let s = play(ALICE, Lever::Trampoline, "0\n");
    assert!(s.completed);
    assert_eq!(s.total, 0.0);
    // Bob reads a human jump like a planned one.
    let s = play(ALICE, Lever::Trampoline, "1\n");
    assert!(s.text.contains("p1 pull"), "{}", s.text);
    assert_eq!(s.total, 1.0);
    let s = play(ALICE, Lever::Tiger, "1\n");
    assert!(s.text.contains("p1 pull"), "{}", s.text);
    assert_eq!(s.total, -10.0);
}

#[test]
fn play_rejects_missing_seats() {
    let cfg = tiger(Mode::Blueprint, 1);
    let err = harness::play_interactive(&cfg, 5, "".as_bytes(), Vec::new()).unwrap_err();
    assert!(matches!(err, HarnessError::Config(_)));
}
