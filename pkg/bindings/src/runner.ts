import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

/** Resolve the negfact executable; override with NEGFACT_BIN. */
export function negfactBinary(): string {
  return process.env.NEGFACT_BIN ?? "negfact";
}

export interface CliResult {
  status: number;
  stdout: string;
  stderr: string;
}

export function runCli(args: string[]): CliResult {
  const proc = spawnSync(negfactBinary(), args, {
    encoding: "utf-8",
    maxBuffer: 64 * 1024 * 1024,
  });
  if (proc.error) {
    throw new Error(
      `failed to run ${negfactBinary()}: ${proc.error.message} (is the Python package installed?)`
    );
  }
  return { status: proc.status ?? -1, stdout: proc.stdout, stderr: proc.stderr };
}

/** Write JSONL lines into a temp dir, run fn, always clean up. */
export function withTempFiles<T>(
  files: Record<string, string>,
  fn: (paths: Record<string, string>) => T
): T {
  const dir = mkdtempSync(join(tmpdir(), "negfact-"));
  try {
    const paths: Record<string, string> = {};
    for (const [name, content] of Object.entries(files)) {
      const path = join(dir, name);
      writeFileSync(path, content, "utf-8");
      paths[name] = path;
    }
    return fn(paths);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

export function toJsonl(records: unknown[]): string {
  return records.map((record) => JSON.stringify(record)).join("\n") + "\n";
}

export function parseJsonl<T>(text: string): T[] {
  return text
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line) as T);
}
