import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdirSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import net from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

/**
 * Test-campaign scaffolding: writes the exchange files by hand, then uses
 * the toolkit's own CLI to derive assignments and to run the server. The
 * UI under test only ever sees the HTTP API.
 */

export const TOPIC_ID = "t-001";

const TOPIC_XML = `<topic id="${TOPIC_ID}">
  <title>city parks and public gardens</title>
  <relevance level="2">The page is entirely about a city park or public garden.</relevance>
  <relevance level="1">The page mentions a park or garden in passing.</relevance>
  <relevance level="0">No park or garden content at all.</relevance>
</topic>
`;

export interface CampaignFixture {
  dir: string;
  adminToken: string;
  tokens: Record<string, string>;
  docIds: string[];
}

function docBody(docId: string, subject: string): string {
  return `<html><head><title>Doc ${docId}</title></head><body>
<h1>Doc ${docId}</h1>
<p>This page talks about ${subject} at some length.</p>
<p>Parks keep appearing here: parks, more parks.</p>
<script>console.log("should never reach the assessor")</script>
</body></html>`;
}

/** 10 plain pooled + 4 engine-top + 3 planted docs = 12 per assessor. */
export function buildCampaign(): CampaignFixture {
  const dir = mkdtempSync(join(tmpdir(), "judge-ui-"));
  writeFileSync(join(dir, "topics.xml"), TOPIC_XML);

  const pooled = Array.from({ length: 10 }, (_, i) => `reg${String(i).padStart(3, "0")}`);
  const engine = Array.from({ length: 4 }, (_, i) => `eng${String(i).padStart(3, "0")}`);
  const planted = Array.from({ length: 3 }, (_, i) => `nz${String(i).padStart(3, "0")}`);
  const docIds = [...pooled, ...engine, ...planted];

  const lines = [`# pool ${TOPIC_ID} target=${docIds.length} underfull=0`];
  for (const d of [...docIds].sort()) {
    const kind = d.startsWith("reg") ? "pooled" : d.startsWith("eng") ? "google" : "noise";
    lines.push(`${TOPIC_ID} ${d} ${kind} 5`);
  }
  writeFileSync(join(dir, "pools.tsv"), lines.join("\n") + "\n");

  const docsDir = join(dir, "docs");
  mkdirSync(docsDir);
  for (const d of docIds) {
    const subject = d.startsWith("nz") ? "slow cooking" : "city parks";
    writeFileSync(join(docsDir, d), docBody(d, subject));
  }

  execFileSync("python3", [
    "-m", "irkit.cli", "assign",
    "--pools", join(dir, "pools.tsv"),
    "--seed", "3",
    "--out-dir", dir,
  ]);

  const payload = JSON.parse(readFileSync(join(dir, "assignments.json"), "utf-8")) as {
    admin_token: string;
    assessors: Record<string, { token: string }>;
  };
  const tokens: Record<string, string> = {};
  for (const [aid, info] of Object.entries(payload.assessors)) {
    tokens[aid] = info.token;
  }
  return { dir, adminToken: payload.admin_token, tokens, docIds };
}

export async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = net.createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      server.close(() => {
        if (address && typeof address === "object") resolve(address.port);
        else reject(new Error("no port"));
      });
    });
  });
}

export interface RunningServer {
  baseUrl: string;
  proc: ChildProcess;
  stop: () => void;
}

export async function startServer(campaignDir: string): Promise<RunningServer> {
  const port = await freePort();
  const proc = spawn(
    "python3",
    [
      "-m", "irkit.cli", "serve",
      "--campaign", campaignDir,
      "--host", "127.0.0.1",
      "--port", String(port),
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  let stderr = "";
  proc.stderr?.on("data", (chunk: Buffer) => {
    stderr += chunk.toString();
  });

  const baseUrl = `http://127.0.0.1:${port}`;
  for (let attempt = 0; attempt < 100; attempt++) {
    if (proc.exitCode !== null) {
      throw new Error(`server exited early (${proc.exitCode}): ${stderr}`);
    }
    try {
      const response = await fetch(`${baseUrl}/health`);
      if (response.ok) {
        return { baseUrl, proc, stop: () => proc.kill() };
      }
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  proc.kill();
  throw new Error(`server never became healthy: ${stderr}`);
}

export async function waitFor(
  condition: () => boolean,
  what: string,
  timeoutMs = 10_000,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (condition()) return;
    await new Promise((r) => setTimeout(r, 10));
  }
  throw new Error(`timed out waiting for ${what}`);
}
