import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    // the UI is served by the session service in production, so the tests
    // run same-origin with the locally spawned service process
    environmentOptions: {
      happyDOM: { url: "http://127.0.0.1:8919" },
    },
    include: ["tests/**/*.test.ts"],
    testTimeout: 180_000,
    hookTimeout: 120_000,
  },
});
