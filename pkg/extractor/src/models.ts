/**
 * Model builders. Each builder lays parameters onto a fresh tape in a fixed
 * order and wires the mean cross-entropy (or quadratic) loss over a dataset,
 * so the same parameter vector drives both a training-set tape and a
 * validation-set tape.
 */

import { Dataset } from "./data";
import { Rng } from "./rng";
import { Tape } from "./tape";

export interface BuiltModel {
  tape: Tape;
  loss: number; // node id of the scalar loss
}

export interface LayerSpec {
  sizes: number[]; // e.g. [4, 12, 8, 3]
}

export const TINY_MLP_LAYERS: LayerSpec = { sizes: [4, 12, 8, 3] };

/** Mean softmax cross-entropy over the dataset, given per-sample logits. */
function crossEntropy(tape: Tape, logitsPerSample: number[][], labels: number[]): number {
  const losses: number[] = [];
  for (let s = 0; s < logitsPerSample.length; s++) {
    const logits = logitsPerSample[s];
    const expd = logits.map((z) => tape.exp(z));
    const logZ = tape.log(tape.sum(expd));
    losses.push(tape.sub(logZ, logits[labels[s]]));
  }
  return tape.mul(tape.sum(losses), tape.constant(1 / losses.length));
}

/** Fully connected tanh network; parameter count follows the layer spec. */
export function buildMlp(data: Dataset, layers: LayerSpec = TINY_MLP_LAYERS): BuiltModel {
  if (layers.sizes[0] !== data.inputDim) {
    throw new Error(`layer spec expects input dim ${layers.sizes[0]}, data has ${data.inputDim}`);
  }
  if (layers.sizes[layers.sizes.length - 1] !== data.numClasses) {
    throw new Error("layer spec output width must match the class count");
  }
  const tape = new Tape();
  // Parameters first so every dataset tape shares one layout.
  const layerParams: number[][] = [];
  for (let l = 0; l + 1 < layers.sizes.length; l++) {
    const count = (layers.sizes[l] + 1) * layers.sizes[l + 1];
    const ids: number[] = [];
    for (let i = 0; i < count; i++) ids.push(tape.param());
    layerParams.push(ids);
  }
  const logitsPerSample: number[][] = [];
  for (let s = 0; s < data.inputs.length; s++) {
    let acts = data.inputs[s].map((x) => tape.constant(x));
    for (let l = 0; l + 1 < layers.sizes.length; l++) {
      const fanIn = layers.sizes[l];
      const fanOut = layers.sizes[l + 1];
      const ids = layerParams[l];
      const next: number[] = [];
      for (let u = 0; u < fanOut; u++) {
        const weights = ids.slice(u * (fanIn + 1), u * (fanIn + 1) + fanIn);
        const bias = ids[u * (fanIn + 1) + fanIn];
        const pre = tape.affine(weights, acts, bias);
        next.push(l + 2 === layers.sizes.length ? pre : tape.tanh(pre));
      }
      acts = next;
    }
    logitsPerSample.push(acts);
  }
  const loss = crossEntropy(tape, logitsPerSample, data.labels);
  return { tape, loss };
}

export interface ConvSpec {
  imageSide: number;
  filters: number;
  kernel: number;
  hidden: number;
}

export const LENET_LIKE: ConvSpec = { imageSide: 8, filters: 3, kernel: 3, hidden: 10 };

/**
 * Small convolutional net: one valid conv + tanh, 2x2 mean pool, tanh dense
 * layer, linear classifier. Input is a flattened imageSide^2 grid.
 */
export function buildConvNet(data: Dataset, spec: ConvSpec = LENET_LIKE): BuiltModel {
  const side = spec.imageSide;
  if (data.inputDim !== side * side) {
    throw new Error(`conv spec expects ${side * side} pixels, data has ${data.inputDim}`);
  }
  const tape = new Tape();
  const convSide = side - spec.kernel + 1;
  const pooled = Math.floor(convSide / 2);

  const kernels: number[][] = [];
  const kernelBias: number[] = [];
  for (let f = 0; f < spec.filters; f++) {
    const k: number[] = [];
    for (let i = 0; i < spec.kernel * spec.kernel; i++) k.push(tape.param());
    kernels.push(k);
    kernelBias.push(tape.param());
  }
  const denseIn = spec.filters * pooled * pooled;
  const dense1: number[] = [];
  for (let i = 0; i < (denseIn + 1) * spec.hidden; i++) dense1.push(tape.param());
  const dense2: number[] = [];
  for (let i = 0; i < (spec.hidden + 1) * data.numClasses; i++) dense2.push(tape.param());

  const logitsPerSample: number[][] = [];
  for (let s = 0; s < data.inputs.length; s++) {
    const px = data.inputs[s].map((x) => tape.constant(x));
    const features: number[] = [];
    for (let f = 0; f < spec.filters; f++) {
      const fmap: number[] = [];
      for (let r = 0; r < convSide; r++) {
        for (let c = 0; c < convSide; c++) {
          const window: number[] = [];
          for (let kr = 0; kr < spec.kernel; kr++) {
            for (let kc = 0; kc < spec.kernel; kc++) {
              window.push(px[(r + kr) * side + (c + kc)]);
            }
          }
          fmap.push(tape.tanh(tape.affine(kernels[f], window, kernelBias[f])));
        }
      }
      for (let r = 0; r < pooled; r++) {
        for (let c = 0; c < pooled; c++) {
          const cells = [
            fmap[(2 * r) * convSide + 2 * c],
            fmap[(2 * r) * convSide + 2 * c + 1],
            fmap[(2 * r + 1) * convSide + 2 * c],
            fmap[(2 * r + 1) * convSide + 2 * c + 1],
          ];
          features.push(tape.mul(tape.sum(cells), tape.constant(0.25)));
        }
      }
    }
    const hidden: number[] = [];
    for (let u = 0; u < spec.hidden; u++) {
      const weights = dense1.slice(u * (denseIn + 1), u * (denseIn + 1) + denseIn);
      const bias = dense1[u * (denseIn + 1) + denseIn];
      hidden.push(tape.tanh(tape.affine(weights, features, bias)));
    }
    const logits: number[] = [];
    for (let u = 0; u < data.numClasses; u++) {
      const weights = dense2.slice(u * (spec.hidden + 1), u * (spec.hidden + 1) + spec.hidden);
      const bias = dense2[u * (spec.hidden + 1) + spec.hidden];
      logits.push(tape.affine(weights, hidden, bias));
    }
    logitsPerSample.push(logits);
  }
  const loss = crossEntropy(tape, logitsPerSample, data.labels);
  return { tape, loss };
}

/**
 * Quadratic toy objective 0.5 * sum_d h_d w_d^2 with h_d = 0.1 * (d + 1);
 * its curvature is exactly h, which pins the extractors.
 */
export function buildQuadratic(dimension = 100): BuiltModel & { curvature: Float64Array } {
  const tape = new Tape();
  const curvature = new Float64Array(dimension);
  const terms: number[] = [];
  for (let d = 0; d < dimension; d++) {
    curvature[d] = 0.1 * (d + 1);
    const w = tape.param();
    terms.push(tape.mul(tape.constant(0.5 * curvature[d]), tape.square(w)));
  }
  const loss = tape.sum(terms);
  return { tape, loss, curvature };
}

export function initParams(count: number, rng: Rng, scale = 0.4): Float64Array {
  const params = new Float64Array(count);
  for (let i = 0; i < count; i++) params[i] = scale * rng.normal();
  return params;
}
