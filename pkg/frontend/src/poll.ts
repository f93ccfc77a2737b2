// Polling loops: an incremental long-poll for the decision stream (1s
// between pages) and a 5s summary cycle for the top bar, queue, and
// charter. Gateway errors back off exponentially up to 30s.

import type { GatewayClient } from "./api.js"
import type { Store } from "./store.js"

export const EVENT_POLL_INTERVAL_MS = 1_000
export const SUMMARY_POLL_INTERVAL_MS = 5_000
const BACKOFF_START_MS = 1_000
const BACKOFF_MAX_MS = 30_000

export function nextBackoff(current: number): number {
	return Math.min(current * 2 || BACKOFF_START_MS, BACKOFF_MAX_MS)
}

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms))

export interface PollHandle {
	stop(): void
	done: Promise<void>
}

export function startEventLoop(
	client: GatewayClient,
	store: Store,
	longPollSeconds = 25,
): PollHandle {
	let running = true
	let backoff = 0
	const done = (async () => {
		while (running) {
			try {
				const page = await client.events(store.get().lastSeq, longPollSeconds)
				store.dispatch({ type: "events_received", events: page.events, at: Date.now() })
				backoff = 0
				await sleep(EVENT_POLL_INTERVAL_MS)
			} catch {
				backoff = nextBackoff(backoff)
				store.dispatch({ type: "gateway_down" })
				await sleep(backoff)
			}
		}
	})()
	return { stop: () => (running = false), done }
}

export async function refreshSummaries(client: GatewayClient, store: Store): Promise<void> {
	const [ledger, trust, tokens] = await Promise.all([
		client.ledger(),
		client.trust(),
		client.tokens(),
	])
	store.dispatch({ type: "summaries_loaded", ledger, trust, tokens })
	store.dispatch({ type: "jobs_loaded", jobs: await client.jobs() })
	const selected = store.get().selectedJobId
	if (selected) {
		store.dispatch({ type: "job_detail_loaded", detail: await client.job(selected) })
		store.dispatch({ type: "audit_reports_loaded", reports: await client.auditTrail() })
	}
}

export function startSummaryLoop(client: GatewayClient, store: Store): PollHandle {
	let running = true
	let backoff = 0
	const done = (async () => {
		while (running) {
			try {
				await refreshSummaries(client, store)
				backoff = 0
				await sleep(SUMMARY_POLL_INTERVAL_MS)
			} catch {
				backoff = nextBackoff(backoff)
				store.dispatch({ type: "gateway_down" })
				await sleep(backoff)
			}
		}
	})()
	return { stop: () => (running = false), done }
}
