#!/usr/bin/env node
/** latentwalk-bridge: export images, features and embeddings into the core's
 * interchange formats.
 *
 *   export-features   --images DIR --model NAME --out FILE
 *   export-embeddings --images DIR --out FILE
 *   export-samples    --gan NAME -n INT --seed INT --out DIR [--scorer NAME]
 *
 * Exit codes: 0 success, 1 runtime failure, 2 usage error.
 */

import * as fs from 'node:fs'
import * as path from 'node:path'

import { encodeFeatset } from './featset.js'
import { FEATURE_MODELS, embed, featureModel, renormalize } from './features.js'
import { decodePpm, encodePpm } from './ppm.js'
import {
  GAN_SOURCES,
  ScorerName,
  drawLatents,
  ganSource,
  sampleLine,
  scoreImage,
} from './samples.js'

class UsageError extends Error {}

interface Args {
  flags: Map<string, string>
  command: string
}

function parseArgs(argv: string[]): Args {
  if (argv.length === 0) {
    throw new UsageError(
      'usage: latentwalk-bridge <export-features|export-embeddings|export-samples> ...',
    )
  }
  const command = argv[0]
  const flags = new Map<string, string>()
  for (let i = 1; i < argv.length; i++) {
    const arg = argv[i]
    if (!arg.startsWith('-')) throw new UsageError(`unexpected argument ${arg}`)
    const key = arg.replace(/^--?/, '')
    const value = argv[i + 1]
    if (value === undefined || value.startsWith('--')) {
      throw new UsageError(`flag --${key} needs a value`)
    }
    flags.set(key, value)
    i++
  }
  return { command, flags }
}

function need(args: Args, key: string): string {
  const v = args.flags.get(key)
  if (v === undefined) throw new UsageError(`missing --${key}`)
  return v
}

/** bad model/source names are argument problems, not runtime failures */
function resolving<T>(make: () => T): T {
  try {
    return make()
  } catch (err) {
    throw new UsageError(err instanceof Error ? err.message : String(err))
  }
}

function listImages(dir: string): string[] {
  if (!fs.existsSync(dir) || !fs.statSync(dir).isDirectory()) {
    throw new UsageError(`no such directory: ${dir}`)
  }
  const files = fs
    .readdirSync(dir)
    .filter((f) => f.toLowerCase().endsWith('.ppm') || f.toLowerCase().endsWith('.pgm'))
    .sort()
  if (files.length === 0) throw new UsageError(`no .ppm/.pgm images in ${dir}`)
  return files.map((f) => path.join(dir, f))
}

function exportFeatures(args: Args): void {
  const imagesDir = need(args, 'images')
  const modelName = args.flags.get('model') ?? 'pool8'
  const out = need(args, 'out')
  const model = resolving(() => featureModel(modelName))
  const rows = listImages(imagesDir).map((file) =>
    model(decodePpm(fs.readFileSync(file))),
  )
  fs.writeFileSync(out, encodeFeatset(rows))
  console.log(`wrote ${rows.length} x ${rows[0].length} features (${modelName}) to ${out}`)
}

function exportEmbeddings(args: Args): void {
  const imagesDir = need(args, 'images')
  const out = need(args, 'out')
  const rows = listImages(imagesDir).map((file) =>
    renormalize(embed(decodePpm(fs.readFileSync(file)))),
  )
  fs.writeFileSync(out, encodeFeatset(rows))
  console.log(`wrote ${rows.length} unit-norm embeddings to ${out}`)
}

function exportSamples(args: Args): void {
  const ganName = need(args, 'gan')
  const n = parseInt(need(args, 'n'), 10)
  const seed = parseInt(args.flags.get('seed') ?? '0', 10)
  const outDir = need(args, 'out')
  const scorer = (args.flags.get('scorer') ?? 'brightness') as ScorerName
  if (!Number.isInteger(n) || n < 1) throw new UsageError(`-n must be a positive integer`)
  if (scorer !== 'brightness' && scorer !== 'zero') {
    throw new UsageError(`unknown scorer '${scorer}'`)
  }
  const source = resolving(() => ganSource(ganName))
  const imagesDir = path.join(outDir, 'images')
  fs.mkdirSync(imagesDir, { recursive: true })
  const latents = drawLatents(source.latentDim, n, seed)
  const lines: string[] = []
  for (let i = 0; i < n; i++) {
    const img = source.synthesize(latents[i])
    const ref = `images/${String(i).padStart(6, '0')}.ppm`
    fs.writeFileSync(path.join(outDir, ref), encodePpm(img))
    lines.push(sampleLine(latents[i], scoreImage(img, scorer), ref))
  }
  fs.writeFileSync(path.join(outDir, 'samples.jsonl'), lines.join('\n') + '\n')
  console.log(`wrote ${n} samples (${ganName}) to ${outDir}`)
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv)
    switch (args.command) {
      case 'export-features':
        exportFeatures(args)
        return 0
      case 'export-embeddings':
        exportEmbeddings(args)
        return 0
      case 'export-samples':
        exportSamples(args)
        return 0
      case 'help':
      case '--help':
        console.log(
          'commands:\n' +
            `  export-features   --images DIR --model NAME --out FILE   (models: ${FEATURE_MODELS.join(', ')})\n` +
            '  export-embeddings --images DIR --out FILE\n' +
            `  export-samples    --gan NAME -n INT --seed INT --out DIR [--scorer brightness|zero]   (gans: ${GAN_SOURCES.join(', ')})`,
        )
        return 0
      default:
        throw new UsageError(`unknown command ${args.command}`)
    }
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`error: ${err.message}`)
      return 2
    }
    console.error(`error: ${err instanceof Error ? err.message : err}`)
    return 1
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href

if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)))
}
