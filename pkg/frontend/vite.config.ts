import { defineConfig } from "vitest/config";

export default defineConfig({
  build: {
    outDir: "dist",
    sourcemap: true,
  },
  server: {
    proxy: {
      // during development the python service runs separately
      "/projects": "http://127.0.0.1:8765",
      "/keywords": "http://127.0.0.1:8765",
      "/jobs": "http://127.0.0.1:8765",
    },
  },
  test: {
    environment: "happy-dom",
    include: ["tests/**/*.test.ts"],
    testTimeout: 120000,
  },
});
