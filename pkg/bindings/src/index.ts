/**
 * Thin Node bindings over the negfact command line.
 *
 * Everything delegates to the installed `negfact` executable through its
 * documented interfaces (corpus/detection/prediction JSONL), so results
 * are identical to driving the CLI directly — the parity test suite holds
 * the bindings to exact equality.
 */

import { parseJsonl, runCli, toJsonl, withTempFiles } from "./runner";

export type FactualityLabel = "affirmed" | "negated" | "possible";
export type EngineMode = "baseline" | "fixed";

export interface BoundDetection {
  label: FactualityLabel;
  trigger: string | null;
  scope: [number, number] | null;
}

export interface SentenceInput {
  id: string;
  text: string;
  entity: { start: number; end: number };
}

export interface LabelMetrics {
  precision: number;
  recall: number;
  f1: number;
  support: number;
}

export interface EvalResult {
  system: string;
  dataset: string;
  total: number;
  labels: Record<FactualityLabel, LabelMetrics>;
}

export interface LabeledId {
  id: string;
  label: FactualityLabel;
}

interface DetectionRecord extends BoundDetection {
  id: string;
}

/** Classify a batch of sentences; order and ids are preserved. */
export function detectBatch(
  sentences: SentenceInput[],
  lang: string,
  mode: EngineMode = "fixed"
): BoundDetection[] {
  if (sentences.length === 0) {
    return [];
  }
  const corpus = sentences.map((sentence) => ({
    id: sentence.id,
    text: sentence.text,
    entity: sentence.entity,
    lang,
  }));
  return withTempFiles({ "corpus.jsonl": toJsonl(corpus) }, (paths) => {
    const result = runCli([
      "detect",
      "--corpus",
      paths["corpus.jsonl"],
      "--lang",
      lang,
      "--mode",
      mode,
    ]);
    if (result.status !== 0) {
      throw new Error(`negfact detect failed (exit ${result.status}): ${result.stderr.trim()}`);
    }
    const records = parseJsonl<DetectionRecord>(result.stdout);
    return records.map(({ label, trigger, scope }) => ({ label, trigger, scope }));
  });
}

/** Classify one sentence's target entity. */
export function detect(
  text: string,
  entity: [number, number],
  lang: string,
  mode: EngineMode = "fixed"
): BoundDetection {
  const [detection] = detectBatch(
    [{ id: "0", text, entity: { start: entity[0], end: entity[1] } }],
    lang,
    mode
  );
  return detection;
}

/** Score predictions against gold labels, pairing by id. */
export function evaluate(gold: LabeledId[], predictions: LabeledId[]): EvalResult {
  // The evaluate subcommand reads gold labels from a corpus file; the text
  // and span are irrelevant for scoring, so a placeholder body is enough.
  const goldRecords = gold.map(({ id, label }) => ({
    id,
    text: "x",
    entity: { start: 0, end: 1 },
    lang: "und",
    label,
  }));
  const files = {
    "gold.jsonl": toJsonl(goldRecords),
    "pred.jsonl": toJsonl(predictions),
  };
  return withTempFiles(files, (paths) => {
    const result = runCli([
      "evaluate",
      "--gold",
      paths["gold.jsonl"],
      "--pred",
      `system=${paths["pred.jsonl"]}`,
      "--format",
      "json",
    ]);
    if (result.status !== 0) {
      throw new Error(`negfact evaluate failed (exit ${result.status}): ${result.stderr.trim()}`);
    }
    return JSON.parse(result.stdout) as EvalResult;
  });
}

export { negfactBinary } from "./runner";
