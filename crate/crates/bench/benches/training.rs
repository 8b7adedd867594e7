use criterion::{criterion_group, criterion_main, Criterion};
use lblab_core::trainer::{init_model, record_predictions, OptimizerState};
use lblab_core::{
    make_blobs, train_and_record, Activation, BlobParams, ModelSpec, OptimizerSpec, RunConfig,
};

fn backward_and_step(c: &mut Criterion) {
    let data = make_blobs(&BlobParams::preset("standard").unwrap()).unwrap();
    let batch = 32;
    let x = data.features()[..batch * data.dim()].to_vec();
    let y: Vec<usize> = (0..batch).map(|i| data.class_index(i)).collect();
    for sizes in [vec![8, 16, 4], vec![8, 64, 64, 4]] {
        let spec = ModelSpec::new(sizes.clone(), Activation::Relu);
        let mut model = init_model(&spec, 0).unwrap();
        let lens: Vec<usize> = model.parameters().iter().map(|p| p.len()).collect();
        let mut opt = OptimizerState::new(OptimizerSpec::adam(), &lens).unwrap();
        c.bench_function(&format!("batch32_step/{spec}"), |b| {
            b.iter(|| {
                let (g, _) = model.backward(&x, &y).unwrap();
                opt.step(&mut model.parameters_mut(), &g.slices()).unwrap();
            })
        });
    }
}

fn recording_pass(c: &mut Criterion) {
    let data = make_blobs(&BlobParams::preset("standard").unwrap()).unwrap();
    let model = init_model(&ModelSpec::new(vec![8, 64, 64, 4], Activation::Relu), 0).unwrap();
    c.bench_function("record_predictions/standard/[8-64-64-4]", |b| {
        b.iter(|| record_predictions(&model, &data).unwrap())
    });
}

fn full_training(c: &mut Criterion) {
    let data = make_blobs(&BlobParams::preset("standard").unwrap()).unwrap();
    let mut config = RunConfig::new(ModelSpec::new(vec![8, 16, 4], Activation::Relu), OptimizerSpec::sgd());
    config.epochs = 10;
    config.runs = 1;
    let mut group = c.benchmark_group("train_and_record");
    group.sample_size(10);
    group.bench_function("standard/[8-16-4]/T10/R1", |b| {
        b.iter(|| train_and_record(&data, &config).unwrap())
    });
    group.finish();
}

criterion_group!(benches, backward_and_step, recording_pass, full_training);
criterion_main!(benches);
