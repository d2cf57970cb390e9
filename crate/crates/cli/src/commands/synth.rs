use tablesieve::synth::{generate, write_corpus, SynthConfig, DATASET_FILE};
use tablesieve::visual::stub::{write_stub_model, StubSpec};
use tablesieve::visual::Backbone;

use crate::config::Context;
use crate::error::{CliError, CmdResult};
use crate::{BackboneArg, StubModelArgs, SynthArgs};

pub fn run(ctx: &Context, args: SynthArgs) -> CmdResult {
    let tables = generate(&SynthConfig {
        n_genuine: args.n_genuine,
        n_layout: args.n_layout,
        seed: ctx.seed(),
    });
    write_corpus(&args.out, &tables, Some(ctx.provenance()))?;
    eprintln!("synth: {} tables → {}", tables.len(), args.out.join(DATASET_FILE).display());
    Ok(())
}

pub fn stub_model(ctx: &Context, args: StubModelArgs) -> CmdResult {
    let backbone = match args.backbone {
        BackboneArg::Vgg16 => Backbone::Vgg16,
        BackboneArg::Resnet50 => Backbone::Resnet50,
    };
    let mut spec = StubSpec::new(backbone, ctx.seed());
    spec.constant_probability = args.constant_probability;
    write_stub_model(&args.out, &spec).map_err(|e| match e {
        tablesieve::Error::InvalidArgument(m) => CliError::Usage(m),
        other => other.into(),
    })?;
    eprintln!("stub-model: {backbone} → {}", args.out.display());
    Ok(())
}
