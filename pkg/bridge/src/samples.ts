/** Seeded procedural image sources standing in for sampling a real generator.
 *
 * Each named source maps an 8-dim standard-normal latent to a 64x64 RGB
 * image; the exported dataset layout (samples.jsonl with inline latents plus
 * images/NNNNNN.ppm) is exactly what the core's dataset reader expects, so a
 * real generator export only has to swap the synthesis function.
 */

import { Image, grayOf } from './ppm.js'
import { Rng } from './rng.js'

export interface GanSource {
  latentDim: number
  size: number
  synthesize(latent: number[]): Image
}

function squash(x: number): number {
  return Math.tanh(x)
}

function blobsSource(): GanSource {
  const size = 64
  return {
    latentDim: 8,
    size,
    synthesize(z: number[]): Image {
      const pixels = new Float64Array(size * size * 3)
      // two soft bumps: coords 0..3 drive one, 4..7 the other
      const params = [z.slice(0, 4), z.slice(4, 8)].map((q, k) => ({
        cx: 0.5 + 0.25 * squash(q[0]) + (k === 0 ? -0.15 : 0.15),
        cy: 0.5 + 0.25 * squash(q[1]) + (k === 0 ? -0.15 : 0.15),
        r: 0.14 + 0.1 * (squash(q[2]) + 1),
        amp: (k === 0 ? 1 : -1) * (0.6 + 0.3 * squash(q[3])),
      }))
      for (let y = 0; y < size; y++) {
        for (let x = 0; x < size; x++) {
          const px = (x + 0.5) / size
          const py = (y + 0.5) / size
          let field = 0
          for (const p of params) {
            const d2 = (px - p.cx) ** 2 + (py - p.cy) ** 2
            field += p.amp * Math.exp(-d2 / (p.r * p.r))
          }
          const base = 0.5 * (Math.tanh(field) + 1)
          const i = 3 * (y * size + x)
          pixels[i] = base
          pixels[i + 1] = 0.5 * (Math.tanh(0.9 * field) + 1)
          pixels[i + 2] = 0.5 * (Math.tanh(0.8 * field) + 1)
        }
      }
      return { width: size, height: size, channels: 3, pixels }
    },
  }
}

function gratingsSource(): GanSource {
  const size = 64
  return {
    latentDim: 8,
    size,
    synthesize(z: number[]): Image {
      const pixels = new Float64Array(size * size * 3)
      const fx = 2 + 2 * squash(z[0])
      const fy = 2 + 2 * squash(z[1])
      const phase = Math.PI * squash(z[2])
      const mix = 0.5 + 0.5 * squash(z[3])
      const tilt = squash(z[4])
      for (let y = 0; y < size; y++) {
        for (let x = 0; x < size; x++) {
          const u = (x + 0.5) / size
          const v = (y + 0.5) / size
          const wave =
            mix * Math.sin(2 * Math.PI * (fx * u + tilt * v) + phase) +
            (1 - mix) * Math.sin(2 * Math.PI * fy * v)
          const base = 0.5 + 0.45 * wave * squash(1 + 0.3 * z[5])
          const i = 3 * (y * size + x)
          pixels[i] = Math.min(1, Math.max(0, base))
          pixels[i + 1] = Math.min(1, Math.max(0, base * (0.9 + 0.1 * squash(z[6]))))
          pixels[i + 2] = Math.min(1, Math.max(0, base * (0.8 + 0.2 * squash(z[7]))))
        }
      }
      return { width: size, height: size, channels: 3, pixels }
    },
  }
}

const sources: Record<string, () => GanSource> = {
  blobs: blobsSource,
  gratings: gratingsSource,
}

export function ganSource(name: string): GanSource {
  const make = sources[name]
  if (!make) {
    throw new Error(
      `unknown gan source '${name}', expected one of: ${Object.keys(sources).join(', ')}`,
    )
  }
  return make()
}

export const GAN_SOURCES = Object.keys(sources)

export type ScorerName = 'brightness' | 'zero'

export function scoreImage(img: Image, scorer: ScorerName): number {
  if (scorer === 'zero') return 0
  const g = grayOf(img)
  let sum = 0
  for (let i = 0; i < g.length; i++) sum += g[i]
  return sum / g.length
}

export function drawLatents(dim: number, n: number, seed: number): number[][] {
  const rng = new Rng(seed)
  const out: number[][] = []
  for (let i = 0; i < n; i++) out.push(rng.gaussianVector(dim))
  return out
}

/** one samples.jsonl line in the core's scored-sample schema */
export function sampleLine(latent: number[], score: number, imageRef: string): string {
  return JSON.stringify({
    latent: { dim: latent.length, space: 'Z', values: latent, meta: {} },
    score,
    image: imageRef,
  })
}
