// Live-gateway integration: spawns the Python gateway with the seeded demo
// fixture and drives the dashboard's store + views against it over real HTTP.
// Requires the backend package to be installed (pip install -e ..).

import { afterAll, beforeAll, describe, expect, it } from "vitest"
import { spawn, type ChildProcess } from "node:child_process"

import { ApiError, GatewayClient } from "../src/api.js"
import { renderCharterEditor, renderDecisionStream, renderTaskDag } from "../src/render.js"
import { Store } from "../src/store.js"

const PORT = 8183 + (process.pid % 500)
const BASE = `http://127.0.0.1:${PORT}`

let server: ChildProcess
const client = new GatewayClient(BASE)

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms))

async function waitForGateway(timeoutMs = 20_000): Promise<void> {
	const deadline = Date.now() + timeoutMs
	while (Date.now() < deadline) {
		try {
			await client.health()
			return
		} catch {
			await sleep(150)
		}
	}
	throw new Error("gateway never came up")
}

async function waitForJobState(jobId: string, states: string[], timeoutMs = 20_000) {
	const deadline = Date.now() + timeoutMs
	while (Date.now() < deadline) {
		const jobs = await client.jobs()
		const job = jobs.find((j) => j.job_id === jobId)
		if (job && states.includes(job.state)) return job
		await sleep(100)
	}
	throw new Error(`job ${jobId} never reached ${states.join("/")}`)
}

beforeAll(async () => {
	server = spawn(
		"python3",
		["-m", "agentgov.cli", "serve", "--port", String(PORT), "--demo"],
		{ stdio: "ignore", cwd: process.cwd() + "/.." },
	)
	await waitForGateway()
	// the seeded queue holds the case-study mission and a doomed summary job
	await waitForJobState("job-0001", ["COMPLETED"])
	await waitForJobState("job-0002", ["FAILED"])
}, 45_000)

afterAll(() => {
	server?.kill()
})

describe("command center against the live gateway", () => {
	it("shows all three case-study task badges as passed", async () => {
		const store = new Store()
		store.dispatch({ type: "job_detail_loaded", detail: await client.job("job-0001") })
		const html = renderTaskDag(store.get())
		expect(html.match(/data-badge="passed"/g)).toHaveLength(3)
		expect(html).toContain("task-1-research")
		expect(html).toContain("task-2-email_writing")
		expect(html).toContain("task-3-email_writing")
	})

	it("renders the aggregated deliverable marks from the audit trail", async () => {
		const store = new Store()
		store.dispatch({ type: "job_detail_loaded", detail: await client.job("job-0001") })
		store.dispatch({ type: "audit_reports_loaded", reports: await client.auditTrail() })
		const detail = store.get().jobDetail!
		expect(detail.deliverable).toContain("# Deliverable")
		expect(Object.keys(detail.task_outputs)).toHaveLength(3)
	})
})

describe("decision stream against the live gateway", () => {
	it("renders CEO/CFO/AUDIT events in strictly increasing seq order across pages", async () => {
		const store = new Store()
		// page through the long-poll endpoint exactly as the UI does
		for (let i = 0; i < 50; i++) {
			const page = await client.events(store.get().lastSeq, 0)
			if (page.events.length === 0) break
			store.dispatch({ type: "events_received", events: page.events, at: Date.now() })
		}
		const events = store.get().events
		expect(events.length).toBeGreaterThan(10)
		const seqs = events.map((e) => e.seq)
		expect(seqs).toEqual([...seqs].sort((a, b) => a - b))
		expect(new Set(seqs).size).toBe(seqs.length)
		const roles = new Set(events.map((e) => e.role))
		expect(roles.has("CEO")).toBe(true)
		expect(roles.has("CFO")).toBe(true)
		expect(roles.has("AUDIT")).toBe(true)

		const html = renderDecisionStream(store.get())
		const positions = seqs.map((seq) => html.indexOf(`data-seq="${seq}"`))
		expect(positions.every((p) => p >= 0)).toBe(true)
		expect(positions).toEqual([...positions].sort((a, b) => a - b))
	})
})

describe("job queue actions against the live gateway", () => {
	it("returns a FAILED job to PENDING on retry", async () => {
		const failed = await waitForJobState("job-0002", ["FAILED"])
		expect(failed.failure_reason).toBe("One or more tasks failed audit")
		const retried = await client.retryJob("job-0002")
		expect(retried.state).toBe("PENDING")
		// the queue worker reprocesses it; it fails again by construction
		await waitForJobState("job-0002", ["FAILED"])
	})

	it("rejects retrying the completed job with a 409 envelope", async () => {
		await expect(client.retryJob("job-0001")).rejects.toMatchObject({
			code: "INVALID_STATE",
			status: 409,
		})
	})
})

describe("charter editor against the live gateway", () => {
	it("surfaces the 422 field path inline for an unknown field", async () => {
		const store = new Store()
		const charter = await client.charter()
		store.dispatch({ type: "charter_loaded", charter })

		const doctored = { ...charter, motto: "go fast" } as typeof charter
		let failure: ApiError | null = null
		try {
			await client.saveCharter(doctored)
		} catch (err) {
			failure = err as ApiError
		}
		expect(failure).toBeInstanceOf(ApiError)
		expect(failure!.status).toBe(422)
		expect(failure!.paths).toContain("motto")

		store.dispatch({
			type: "charter_save_failed",
			paths: failure!.paths,
			message: failure!.message,
		})
		const html = renderCharterEditor(store.get())
		expect(html).toContain('data-path="motto"')
		expect(html).toContain("invalid field: motto")
	})

	it("accepts a clean round-trip save", async () => {
		const charter = await client.charter()
		const saved = await client.saveCharter(charter)
		expect(saved).toEqual(charter)
	})
})
