#!/usr/bin/env node
/**
 * sens-extract CLI.
 *
 *   sens-extract extract --model tiny-mlp --estimator exact --out table.psns
 *
 * Models: tiny-mlp | lenet-like | quadratic.  Datasets: synthetic-blobs |
 * digit-subset.  Estimators: exact (exact-per-parameter) | hutchinson
 * (hutchinson-diagonal).  --csv adds a CSV export next to the PSNS binary.
 */

import { DatasetId, EstimatorId, ExtractionSpec, ModelId, runExtraction } from "./extract";

function parseArgs(argv: string[]): Map<string, string> {
  const out = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`expected --flag value pairs, got ${argv.slice(i).join(" ")}`);
    }
    out.set(key.slice(2), argv[i + 1]);
  }
  return out;
}

const ESTIMATORS: Record<string, EstimatorId> = {
  "exact": "exact-per-parameter",
  "exact-per-parameter": "exact-per-parameter",
  "hutchinson": "hutchinson-diagonal",
  "hutchinson-diagonal": "hutchinson-diagonal",
};

export function main(argv: string[]): number {
  if (argv.length === 0 || argv[0] === "--help") {
    console.log("usage: sens-extract extract --model tiny-mlp|lenet-like|quadratic "
      + "[--dataset synthetic-blobs|digit-subset] [--estimator exact|hutchinson] "
      + "[--samples N] [--seed N] --out table.psns [--csv table.csv]");
    return argv.length === 0 ? 2 : 0;
  }
  if (argv[0] !== "extract") {
    console.error(`error: unknown command ${argv[0]}`);
    return 2;
  }
  let flags: Map<string, string>;
  try {
    flags = parseArgs(argv.slice(1));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }

  const model = (flags.get("model") ?? "tiny-mlp") as ModelId;
  if (!["tiny-mlp", "lenet-like", "quadratic"].includes(model)) {
    console.error(`error: unknown model ${model}`);
    return 2;
  }
  const dataset = (flags.get("dataset")
    ?? (model === "lenet-like" ? "digit-subset" : "synthetic-blobs")) as DatasetId;
  if (!["synthetic-blobs", "digit-subset"].includes(dataset)) {
    console.error(`error: unknown dataset ${dataset}`);
    return 2;
  }
  const estimatorKey = flags.get("estimator") ?? "exact";
  const estimator = ESTIMATORS[estimatorKey];
  if (!estimator) {
    console.error(`error: unknown estimator ${estimatorKey}`);
    return 2;
  }
  const out = flags.get("out");
  if (!out) {
    console.error("error: --out is required");
    return 2;
  }

  const spec: ExtractionSpec = {
    modelId: model,
    dataset,
    estimator,
    samples: Number(flags.get("samples") ?? 2000),
    outputPath: out,
    csvPath: flags.get("csv"),
    seed: flags.has("seed") ? Number(flags.get("seed")) : undefined,
  };
  try {
    const report = runExtraction(spec);
    if (report.warning) console.warn(`warning: ${report.warning}`);
    console.log(
      `wrote ${report.dimension} sensitivities to ${out}`
      + (spec.csvPath ? ` and ${spec.csvPath}` : "")
      + ` (clamped ${report.clamped}, grad norm ${report.gradNorm.toExponential(2)})`,
    );
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
