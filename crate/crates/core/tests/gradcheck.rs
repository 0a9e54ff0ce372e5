mod common;

use bel_core::decoder::{level_softmax, DecoderKind};
use bel_core::losses::{bce_loss, ce_loss, regression_loss, LossKind, Norm};
use bel_core::toytrain::Head;
use bel_core::{CodeKind, QuantizationSpec};
use common::{central_diff, logits, mlp_gradcheck, random_code, rel_error, small_config, STEP};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn bce_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let c = random_code(&mut rng);
        let q = rng.random_range(1..=c.levels());
        let z = logits(&mut rng, c.bits());
        let target = c.row(q);
        let analytic = bce_loss(&z, target).unwrap().grad;
        let numeric = central_diff(|x| bce_loss(x, target).unwrap().value, &z, STEP);
        assert!(rel_error(&analytic, &numeric) < 1e-5);
    }
}

#[test]
fn ce_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let c = random_code(&mut rng);
        let q = rng.random_range(1..=c.levels());
        let z = logits(&mut rng, c.bits());
        let analytic = ce_loss(&z, &c, q).unwrap().grad;
        let numeric = central_diff(|x| ce_loss(x, &c, q).unwrap().value, &z, STEP);
        assert!(rel_error(&analytic, &numeric) < 1e-5);
    }
}

#[test]
fn regression_gradients() {
    for (norm, seed) in [(Norm::L1, 3), (Norm::L2, 4)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let c = random_code(&mut rng);
            let y = rng.random_range(1.0..=c.levels() as f64);
            // smaller logits keep the expectation away from the target's kink for L1
            let z: Vec<f64> = logits(&mut rng, c.bits()).iter().map(|v| v * 0.3).collect();
            let analytic = regression_loss(&z, &c, y, norm).unwrap().grad;
            let numeric =
                central_diff(|x| regression_loss(x, &c, y, norm).unwrap().value, &z, STEP);
            let err = rel_error(&analytic, &numeric);
            assert!(
                err < 1e-5,
                "{norm:?} {} L={} err={err}",
                c.kind(),
                c.levels()
            );
        }
    }
}

#[test]
fn bce_descends_along_negative_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let c = random_code(&mut rng);
        let target = c.row(rng.random_range(1..=c.levels())).to_vec();
        let mut z = logits(&mut rng, c.bits());
        let mut last = bce_loss(&z, &target).unwrap().value;
        for _ in 0..10 {
            let g = bce_loss(&z, &target).unwrap().grad;
            z.iter_mut().zip(&g).for_each(|(v, d)| *v -= 0.1 * d);
            let now = bce_loss(&z, &target).unwrap().value;
            assert!(now < last);
            last = now;
        }
    }
}

#[test]
fn ce_is_a_negative_log_probability() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let c = random_code(&mut rng);
        let q = rng.random_range(1..=c.levels());
        let z: Vec<f64> = logits(&mut rng, c.bits())
            .iter()
            .map(|v| v * 10.0)
            .collect();
        let loss = ce_loss(&z, &c, q).unwrap().value;
        let p = level_softmax(&z, &c).unwrap()[q - 1];
        assert!(loss >= 0.0 && (0.0..=1.0).contains(&p));
        assert!((loss + p.ln()).abs() < 1e-9 * loss.max(1.0));
    }
}

#[test]
fn mlp_gradient_every_encoding_and_loss() {
    let config = small_config();
    let quant = QuantizationSpec::new(-1.0, 3.0, 12).unwrap();
    let losses = [LossKind::Bce, LossKind::Ce, LossKind::L1, LossKind::L2];
    let mut instance = 0u64;
    for kind in CodeKind::ALL {
        for loss in losses {
            let head = Head::Bel {
                code: kind.generate(12).unwrap(),
                loss,
                decoder: DecoderKind::GenEx,
                quant,
            };
            for _ in 0..5 {
                let err = mlp_gradcheck(&head, &config, instance);
                assert!(err < 1e-4, "{kind} {loss}: {err}");
                instance += 1;
            }
        }
    }
    for norm in [Norm::L1, Norm::L2] {
        let head = Head::Direct { norm, quant };
        for _ in 0..5 {
            assert!(mlp_gradcheck(&head, &config, instance) < 1e-4);
            instance += 1;
        }
    }
}

#[test]
fn mlp_gradient_with_several_outputs() {
    let mut config = small_config();
    config.task.outputs = 3;
    config.task.input_dim = 3;
    let head = Head::Bel {
        code: CodeKind::Johnson.generate(10).unwrap(),
        loss: LossKind::Bce,
        decoder: DecoderKind::Gen,
        quant: QuantizationSpec::new(-1.0, 3.0, 10).unwrap(),
    };
    for seed in 0..5 {
        assert!(mlp_gradcheck(&head, &config, seed) < 1e-4);
    }
}
