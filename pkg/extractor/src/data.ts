/** Toy datasets: Gaussian blobs and noisy 8x8 digit glyphs. */

import { Rng } from "./rng";

export interface Dataset {
  inputs: number[][];
  labels: number[];
  numClasses: number;
  inputDim: number;
}

/** Gaussian clusters around fixed class centers. */
export function syntheticBlobs(
  samples: number,
  rng: Rng,
  inputDim = 4,
  numClasses = 3,
  spread = 0.6,
): Dataset {
  const centers: number[][] = [];
  for (let c = 0; c < numClasses; c++) {
    const center: number[] = [];
    for (let d = 0; d < inputDim; d++) center.push(2.0 * Math.cos(1.7 * c + 0.9 * d));
    centers.push(center);
  }
  const inputs: number[][] = [];
  const labels: number[] = [];
  for (let i = 0; i < samples; i++) {
    const c = i % numClasses;
    inputs.push(centers[c].map((x) => x + spread * rng.normal()));
    labels.push(c);
  }
  return { inputs, labels, numClasses, inputDim };
}

// 8x8 glyphs for digits 0..3, rows top to bottom.
const GLYPHS = [
  ["00111100", "01000010", "01000110", "01001010", "01010010", "01100010", "01000010", "00111100"],
  ["00011000", "00111000", "01011000", "00011000", "00011000", "00011000", "00011000", "01111110"],
  ["00111100", "01000010", "00000010", "00000100", "00011000", "00100000", "01000000", "01111110"],
  ["00111100", "01000010", "00000010", "00011100", "00000010", "00000010", "01000010", "00111100"],
];

/** Noisy, brightness-jittered renderings of a small digit set. */
export function digitSubset(samples: number, rng: Rng, noise = 0.25): Dataset {
  const inputs: number[][] = [];
  const labels: number[] = [];
  for (let i = 0; i < samples; i++) {
    const c = i % GLYPHS.length;
    const gain = 0.8 + 0.4 * rng.next();
    const pixels: number[] = [];
    for (const row of GLYPHS[c]) {
      for (const ch of row) {
        pixels.push(gain * (ch === "1" ? 1 : 0) + noise * rng.normal());
      }
    }
    inputs.push(pixels);
    labels.push(c);
  }
  return { inputs, labels, numClasses: GLYPHS.length, inputDim: 64 };
}

export function splitDataset(data: Dataset, valFraction: number, rng: Rng): {
  train: Dataset;
  val: Dataset;
} {
  const order = data.inputs.map((_, i) => i);
  for (let i = order.length - 1; i > 0; i--) {
    const j = rng.int(i + 1);
    [order[i], order[j]] = [order[j], order[i]];
  }
  const nVal = Math.max(1, Math.round(valFraction * order.length));
  const pick = (ids: number[]): Dataset => ({
    inputs: ids.map((i) => data.inputs[i]),
    labels: ids.map((i) => data.labels[i]),
    numClasses: data.numClasses,
    inputDim: data.inputDim,
  });
  return { train: pick(order.slice(nVal)), val: pick(order.slice(0, nVal)) };
}
