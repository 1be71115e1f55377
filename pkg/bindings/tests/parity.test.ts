/**
 * Parity suite: every fixture classified through the bindings must equal
 * the primary CLI's output exactly, and metric values must match to full
 * precision.
 */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import {
  BoundDetection,
  EngineMode,
  FactualityLabel,
  LabeledId,
  detect,
  detectBatch,
  evaluate,
} from "../src/index";
import { parseJsonl, runCli, toJsonl, withTempFiles } from "../src/runner";

const DATA_DIR = join(__dirname, "..", "..", "tests", "data");

interface FixtureRecord {
  id: string;
  text: string;
  entity: { start: number; end: number };
  lang: string;
  label?: FactualityLabel;
}

interface DetectionRecord extends BoundDetection {
  id: string;
}

function loadFixture(name: string): FixtureRecord[] {
  return parseJsonl<FixtureRecord>(readFileSync(join(DATA_DIR, name), "utf-8"));
}

function cliDetect(records: FixtureRecord[], lang: string, mode: EngineMode): DetectionRecord[] {
  const corpus = records.map((r) => ({ id: r.id, text: r.text, entity: r.entity, lang }));
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
    expect(result.status).toBe(0);
    return parseJsonl<DetectionRecord>(result.stdout);
  });
}

const FIXTURES: Array<{ file: string; lang: string }> = [
  { file: "golden_sentences.jsonl", lang: "en" },
  { file: "golden_sentences.jsonl", lang: "de" },
  { file: "regression_de.jsonl", lang: "de" },
  { file: "errors_en.jsonl", lang: "en" },
];

describe("detection parity with the primary CLI", () => {
  for (const { file, lang } of FIXTURES) {
    for (const mode of ["baseline", "fixed"] as EngineMode[]) {
      it(`${file} [${lang}, ${mode}]`, () => {
        const records = loadFixture(file).filter((r) => r.lang === lang);
        expect(records.length).toBeGreaterThan(0);
        const viaBindings = detectBatch(records, lang, mode);
        const viaCli = cliDetect(records, lang, mode);
        expect(viaBindings.length).toBe(viaCli.length);
        viaCli.forEach((cliRecord, index) => {
          expect(cliRecord.id).toBe(records[index].id);
          expect(viaBindings[index]).toStrictEqual({
            label: cliRecord.label,
            trigger: cliRecord.trigger,
            scope: cliRecord.scope,
          });
        });
      });
    }
  }
});

describe("detect", () => {
  it("labels the golden negation row", () => {
    const detection = detect("Patient denies headache.", [15, 23], "en");
    expect(detection.label).toBe("negated");
    expect(detection.trigger).toBe("denies");
    expect(detection.scope).toStrictEqual([15, 23]);
  });

  it("returns affirmed without a trigger", () => {
    const detection = detect("Patient reports headache.", [16, 24], "en");
    expect(detection).toStrictEqual({ label: "affirmed", trigger: null, scope: null });
  });

  it("negates compounds in fixed mode only", () => {
    const text = "Sie war am Tag der Entlassung schmerzfrei.";
    const span: [number, number] = [30, 41];
    expect(detect(text, span, "de", "fixed").label).toBe("negated");
    expect(detect(text, span, "de", "baseline").label).toBe("affirmed");
  });

  it("throws on an invalid span", () => {
    expect(() => detect("short", [0, 99], "en")).toThrow(/failed/);
  });

  it("throws on an unknown language", () => {
    expect(() => detect("text here", [0, 4], "fr")).toThrow(/failed/);
  });
});

describe("evaluate parity with the primary CLI", () => {
  function cliEvaluate(goldFile: string, predFile: string) {
    const result = runCli([
      "evaluate",
      "--gold",
      join(DATA_DIR, goldFile),
      "--pred",
      `system=${join(DATA_DIR, predFile)}`,
      "--format",
      "json",
    ]);
    expect(result.status).toBe(0);
    return JSON.parse(result.stdout);
  }

  function fixtureGold(): LabeledId[] {
    return loadFixture("gold_six.jsonl").map((r) => ({ id: r.id, label: r.label! }));
  }

  it("matches on the hand-tallied six-pair case", () => {
    const predictions = parseJsonl<LabeledId>(
      readFileSync(join(DATA_DIR, "pred_confused.jsonl"), "utf-8")
    );
    const viaBindings = evaluate(fixtureGold(), predictions);
    const viaCli = cliEvaluate("gold_six.jsonl", "pred_confused.jsonl");
    expect(viaBindings.labels).toStrictEqual(viaCli.labels);
    expect(viaBindings.total).toBe(viaCli.total);
    expect(viaBindings.labels.negated.f1).toBe(0.8);
  });

  it("matches on perfect predictions", () => {
    const viaBindings = evaluate(fixtureGold(), fixtureGold());
    const viaCli = cliEvaluate("gold_six.jsonl", "pred_perfect.jsonl");
    expect(viaBindings.labels).toStrictEqual(viaCli.labels);
    for (const label of ["affirmed", "negated", "possible"] as FactualityLabel[]) {
      expect(viaBindings.labels[label].f1).toBe(1.0);
    }
  });

  it("throws on missing prediction ids", () => {
    const gold = fixtureGold();
    expect(() => evaluate(gold, gold.slice(0, 3))).toThrow(/exit 2/);
  });

  it("returns zeros for empty inputs", () => {
    const result = evaluate([], []);
    expect(result.total).toBe(0);
    expect(result.labels.possible.f1).toBe(0);
  });
});
