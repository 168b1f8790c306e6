use jfp::model::JfpModel;
use jfp::scene::{generate_dataset, GeneratorConfig, ScenarioKind};
use jfp::training::{mean_loss, train, TrainConfig};

#[test]
fn two_thousand_steps_halve_the_dataset_loss() {
    let data = generate_dataset(&[ScenarioKind::Intersection], 500, 1, &GeneratorConfig::default()).unwrap();
    let cfg = TrainConfig {
        seed: 1,
        steps: 2000,
        ..TrainConfig::default()
    };
    let start = mean_loss(&JfpModel::new(cfg.model, cfg.seed).unwrap(), &data, &cfg.inference, 0).unwrap();
    let out = train(&data, &cfg, None).unwrap();
    let end = mean_loss(&out.model, &data, &cfg.inference, 0).unwrap();
    let drop = 1.0 - end.total / start.total;
    println!("dataset loss {:.4} -> {:.4} ({:.1}% lower)", start.total, end.total, 100.0 * drop);
    assert!(drop >= 0.5, "loss fell by only {:.1}%: {start:?} -> {end:?}", 100.0 * drop);
}
