import { describe, expect, it } from "vitest";

import { digitSubset, splitDataset, syntheticBlobs } from "../src/data";
import { Rng } from "../src/rng";
import { trainAdam } from "../src/train";
import { buildMlp, initParams } from "../src/models";

describe("datasets", () => {
  it("blobs are deterministic for a fixed seed", () => {
    const a = syntheticBlobs(30, new Rng(5));
    const b = syntheticBlobs(30, new Rng(5));
    expect(a.inputs).toEqual(b.inputs);
    expect(a.labels).toEqual(b.labels);
  });

  it("digit glyphs have 64 pixels and 4 classes", () => {
    const data = digitSubset(16, new Rng(1));
    expect(data.inputDim).toBe(64);
    expect(data.numClasses).toBe(4);
    expect(new Set(data.labels).size).toBe(4);
  });

  it("split covers the data without overlap", () => {
    const data = syntheticBlobs(40, new Rng(2));
    const { train, val } = splitDataset(data, 0.25, new Rng(3));
    expect(train.inputs.length + val.inputs.length).toBe(40);
    expect(val.inputs.length).toBe(10);
  });
});

describe("training", () => {
  it("reaches a plateau on the blobs task", () => {
    const rng = new Rng(4);
    const data = syntheticBlobs(60, rng, 3, 2);
    const model = buildMlp(data, { sizes: [3, 6, 2] });
    const params = initParams(model.tape.nParams, rng);
    const before = model.tape.forward(params);
    const result = trainAdam(model.tape, model.loss, params, { steps: 800 });
    expect(result.finalLoss).toBeLessThan(before);
    expect(result.gradNorm).toBeLessThan(1e-2);
  }, 60_000);
});
