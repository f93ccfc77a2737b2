// Browser bootstrap: wires the store, the polling loops, and delegated DOM
// events. All state lives in the store; this file only translates between
// DOM events and gateway calls.

import { ApiError, GatewayClient } from "./api.js"
import { renderApp } from "./render.js"
import { Store } from "./store.js"
import { refreshSummaries, startEventLoop, startSummaryLoop } from "./poll.js"
import type { CharterDocument } from "./types.js"

const client = new GatewayClient("")
const store = new Store()
const root = document.getElementById("app")!

let renderQueued = false
store.subscribe(() => {
	// coalesce bursts of dispatches into one frame
	if (renderQueued) return
	renderQueued = true
	requestAnimationFrame(() => {
		renderQueued = false
		render()
	})
})

function render(): void {
	const activeId = (document.activeElement as HTMLElement | null)?.closest("form")?.id
	if (activeId === "charter-form" || activeId === "mission-form") {
		return // don't clobber a form mid-edit; the next poll repaints
	}
	root.innerHTML = renderApp(store.get())
}

root.addEventListener("click", (raw) => {
	const target = raw.target as HTMLElement
	const button = target.closest<HTMLButtonElement>("button[data-action]")
	if (!button) return
	raw.preventDefault()
	const jobId = button.dataset.job ?? ""
	const action = button.dataset.action
	void (async () => {
		try {
			if (action === "view") {
				store.dispatch({ type: "job_selected", jobId })
				store.dispatch({ type: "job_detail_loaded", detail: await client.job(jobId) })
				store.dispatch({ type: "audit_reports_loaded", reports: await client.auditTrail() })
			} else if (action === "retry") {
				await client.retryJob(jobId)
				store.dispatch({ type: "jobs_loaded", jobs: await client.jobs() })
			} else if (action === "delete") {
				await client.deleteJob(jobId)
				if (store.get().selectedJobId === jobId) {
					store.dispatch({ type: "job_selected", jobId: null })
				}
				store.dispatch({ type: "jobs_loaded", jobs: await client.jobs() })
			} else if (action === "edit") {
				const current = store.get().jobs.find((j) => j.job_id === jobId)
				const goal = window.prompt("New goal:", current?.goal ?? "")
				if (goal !== null && goal.trim()) {
					await client.editJob(jobId, { goal })
					store.dispatch({ type: "jobs_loaded", jobs: await client.jobs() })
				}
			} else if (action === "export-markdown") {
				const detail = store.get().jobDetail
				if (detail?.deliverable) {
					downloadMarkdown(`${detail.job_id}.md`, detail.deliverable)
				}
			}
		} catch (err) {
			store.dispatch({ type: "notice", message: err instanceof Error ? err.message : String(err) })
		}
	})()
})

root.addEventListener("submit", (raw) => {
	const form = raw.target as HTMLFormElement
	raw.preventDefault()
	if (form.id === "mission-form") {
		const data = new FormData(form)
		const goal = String(data.get("goal") ?? "").trim()
		const revenueRaw = String(data.get("revenue") ?? "").trim()
		const revenue = revenueRaw ? Number(revenueRaw) : undefined
		void (async () => {
			try {
				const job = await client.submitMission(goal, revenue)
				store.dispatch({ type: "notice", message: `submitted ${job.job_id}` })
				store.dispatch({ type: "job_selected", jobId: job.job_id })
				store.dispatch({ type: "jobs_loaded", jobs: await client.jobs() })
			} catch (err) {
				store.dispatch({
					type: "notice",
					message: err instanceof Error ? err.message : String(err),
				})
			}
		})()
	} else if (form.id === "charter-form") {
		void saveCharterFromForm(form)
	}
})

async function saveCharterFromForm(form: HTMLFormElement): Promise<void> {
	const data = new FormData(form)
	try {
		const document: CharterDocument = {
			mission: String(data.get("mission") ?? ""),
			core_competencies: JSON.parse(String(data.get("core_competencies") ?? "[]")),
			fiscal_boundaries: {
				daily_burn_max_usd: Number(data.get("daily_burn_max_usd")),
				max_budget_usd: Number(data.get("max_budget_usd")),
				currency: String(data.get("currency") ?? "USD"),
				min_job_margin_ratio: Number(data.get("min_job_margin_ratio")),
				min_reserve_usd: Number(data.get("min_reserve_usd")),
			},
			success_kpis: JSON.parse(String(data.get("success_kpis") ?? "[]")),
		}
		const saved = await client.saveCharter(document)
		store.dispatch({ type: "charter_saved", charter: saved })
	} catch (err) {
		if (err instanceof ApiError) {
			store.dispatch({ type: "charter_save_failed", paths: err.paths, message: err.message })
		} else {
			store.dispatch({
				type: "charter_save_failed",
				paths: [],
				message: err instanceof Error ? err.message : String(err),
			})
		}
	}
}

function downloadMarkdown(filename: string, content: string): void {
	const blob = new Blob([content], { type: "text/markdown" })
	const url = URL.createObjectURL(blob)
	const anchor = document.createElement("a")
	anchor.href = url
	anchor.download = filename
	anchor.click()
	URL.revokeObjectURL(url)
}

async function boot(): Promise<void> {
	store.dispatch({ type: "charter_loaded", charter: await client.charter() })
	await refreshSummaries(client, store)
	startEventLoop(client, store)
	startSummaryLoop(client, store)
	render()
}

void boot()
