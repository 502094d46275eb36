/** Deterministic image feature extractors for FID-style evaluation.
 *
 * No pretrained weights are involved: each named model is a fixed,
 * seed-determined map from the luminance plane to a feature vector, so
 * exports reproduce exactly and disjoint image sets produce comparable
 * feature clouds. Heavier learned extractors can slot in behind the same
 * name -> vector contract.
 */

import { Image, grayOf } from './ppm.js'
import { Rng } from './rng.js'

/** block-mean pooling of the luminance plane onto a grid x grid thumbnail */
export function poolGray(img: Image, grid: number): number[] {
  const g = grayOf(img)
  const { width: w, height: h } = img
  const sums = new Float64Array(grid * grid)
  const counts = new Float64Array(grid * grid)
  for (let y = 0; y < h; y++) {
    const gy = Math.floor((y * grid) / h)
    for (let x = 0; x < w; x++) {
      const gx = Math.floor((x * grid) / w)
      sums[gy * grid + gx] += g[y * w + x]
      counts[gy * grid + gx] += 1
    }
  }
  const out = new Array<number>(grid * grid)
  for (let i = 0; i < out.length; i++) out[i] = sums[i] / counts[i]
  return out
}

/** seeded near-orthogonal projection matrix via Gram-Schmidt */
function projectionMatrix(rows: number, cols: number, seed: number): number[][] {
  const rng = new Rng(seed)
  const mat: number[][] = []
  for (let r = 0; r < rows; r++) {
    let v = rng.gaussianVector(cols)
    for (const prev of mat) {
      const dot = v.reduce((acc, x, i) => acc + x * prev[i], 0)
      v = v.map((x, i) => x - dot * prev[i])
    }
    const norm = Math.sqrt(v.reduce((acc, x) => acc + x * x, 0))
    mat.push(v.map((x) => x / norm))
  }
  return mat
}

export type FeatureModel = (img: Image) => number[]

const PROJ_SEED = 1301

const models: Record<string, FeatureModel> = {
  /** 8x8 pooled luminance, matching the core CLI's built-in directory features */
  pool8: (img) => poolGray(img, 8),
  /** 16x16 pooled luminance */
  pool16: (img) => poolGray(img, 16),
  /** 16x16 pooling followed by a fixed 64-dim near-orthogonal projection */
  proj64: (() => {
    const proj = projectionMatrix(64, 256, PROJ_SEED)
    return (img: Image) => {
      const pooled = poolGray(img, 16)
      return proj.map((row) => row.reduce((acc, w, i) => acc + w * pooled[i], 0))
    }
  })(),
}

export function featureModel(name: string): FeatureModel {
  const model = models[name]
  if (!model) {
    throw new Error(
      `unknown feature model '${name}', expected one of: ${Object.keys(models).join(', ')}`,
    )
  }
  return model
}

export const FEATURE_MODELS = Object.keys(models)

/** pooled, mean-removed, unit-normalized identity embedding (8x8 grid) */
export function embed(img: Image): number[] {
  const pooled = poolGray(img, 8)
  const mean = pooled.reduce((a, b) => a + b, 0) / pooled.length
  const centered = pooled.map((v) => v - mean)
  const norm = Math.sqrt(centered.reduce((acc, v) => acc + v * v, 0))
  if (norm < 1e-12) {
    const canon = new Array<number>(pooled.length).fill(0)
    canon[0] = 1
    return canon
  }
  return centered.map((v) => v / norm)
}

/** renormalize a row to exactly unit length (export invariant) */
export function renormalize(row: number[]): number[] {
  const norm = Math.sqrt(row.reduce((acc, v) => acc + v * v, 0))
  if (norm < 1e-12) {
    const canon = new Array<number>(row.length).fill(0)
    canon[0] = 1
    return canon
  }
  return row.map((v) => v / norm)
}
