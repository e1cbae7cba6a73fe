import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    // The e2e file spawns one query service and reuses it across tests.
    fileParallelism: false,
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
