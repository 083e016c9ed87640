/** Spawns the engine's HTTP service in replay mode for the UI test run. */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";

import { BASE_URL, CORRECTION_UNMET, SERVER_PORT } from "./config.js";

const REPO_ROOT = resolve(__dirname, "..", "..");
const FIXTURES = join(REPO_ROOT, "tests", "data", "fixtures");

let server: ChildProcess | undefined;

async function waitForReady(timeoutMs = 20_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE_URL}/projects`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error(`replay server did not become ready on ${BASE_URL}`);
}

export async function setup(): Promise<void> {
  const dataDir = mkdtempSync(join(tmpdir(), "animstudio-ui-test-"));
  server = spawn(
    "python3",
    [
      "-m",
      "animstudio.cli",
      "serve",
      "--data-dir",
      dataDir,
      "--port",
      String(SERVER_PORT),
      "--gateway-mode",
      "replay",
      "--fixtures-dir",
      FIXTURES,
      "--mock-analyzer",
      `unsat:${CORRECTION_UNMET}|sat`,
    ],
    { stdio: ["ignore", "pipe", "pipe"], cwd: REPO_ROOT },
  );
  const stderr: string[] = [];
  server.stderr?.on("data", (chunk) => stderr.push(String(chunk)));
  server.on("exit", (code) => {
    if (code !== null && code !== 0) {
      console.error(`replay server exited with ${code}\n${stderr.join("")}`);
    }
  });
  await waitForReady();
}

export async function teardown(): Promise<void> {
  if (server && !server.killed) {
    server.kill("SIGTERM");
    await new Promise((resolve) => setTimeout(resolve, 300));
    if (server.exitCode === null) server.kill("SIGKILL");
  }
}
