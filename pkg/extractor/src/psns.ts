/**
 * PSNS / CSV table export, byte-compatible with the simulator's loaders.
 *
 * PSNS layout, all little endian: magic "PSNS", u16 version = 1,
 * u16 quant_bits, u64 dimension, then dimension float64 values.
 */

import * as fs from "fs";
import * as path from "path";

const MAGIC = "PSNS";
const VERSION = 1;
const HEADER_BYTES = 16;

export function encodePsns(values: ArrayLike<number>, quantBits = 8): Buffer {
  const buffer = Buffer.alloc(HEADER_BYTES + 8 * values.length);
  buffer.write(MAGIC, 0, "ascii");
  buffer.writeUInt16LE(VERSION, 4);
  buffer.writeUInt16LE(quantBits, 6);
  buffer.writeBigUInt64LE(BigInt(values.length), 8);
  for (let i = 0; i < values.length; i++) {
    buffer.writeDoubleLE(values[i], HEADER_BYTES + 8 * i);
  }
  return buffer;
}

export function writePsns(values: ArrayLike<number>, filePath: string, quantBits = 8): void {
  fs.mkdirSync(path.dirname(filePath), { recursive: true });
  fs.writeFileSync(filePath, encodePsns(values, quantBits));
}

export interface PsnsTable {
  values: Float64Array;
  quantBits: number;
}

export function readPsns(filePath: string): PsnsTable {
  const raw = fs.readFileSync(filePath);
  if (raw.length < HEADER_BYTES || raw.toString("ascii", 0, 4) !== MAGIC) {
    throw new Error(`${filePath} is not a PSNS file`);
  }
  if (raw.readUInt16LE(4) !== VERSION) {
    throw new Error(`unsupported PSNS version in ${filePath}`);
  }
  const quantBits = raw.readUInt16LE(6);
  const dimension = Number(raw.readBigUInt64LE(8));
  if (raw.length !== HEADER_BYTES + 8 * dimension) {
    throw new Error(`PSNS payload length disagrees with header in ${filePath}`);
  }
  const values = new Float64Array(dimension);
  for (let i = 0; i < dimension; i++) values[i] = raw.readDoubleLE(HEADER_BYTES + 8 * i);
  return { values, quantBits };
}

export function writeCsv(values: ArrayLike<number>, filePath: string): void {
  fs.mkdirSync(path.dirname(filePath), { recursive: true });
  const lines = ["index,sensitivity"];
  for (let i = 0; i < values.length; i++) lines.push(`${i},${values[i]}`);
  fs.writeFileSync(filePath, lines.join("\n") + "\n");
}
