// Pure HTML-string views over the store state. main.ts mounts them into the
// page; tests assert on the strings directly, no DOM needed.

import {
	averageTrust,
	reportsForJob,
	type AppState,
} from "./store.js"
import type { GovernanceEvent, JobSummary, TaskBadge } from "./types.js"

const escapeMap: Record<string, string> = {
	"&": "&amp;",
	"<": "&lt;",
	">": "&gt;",
	'"': "&quot;",
	"'": "&#39;",
}

export function esc(text: string): string {
	return text.replace(/[&<>"']/g, (ch) => escapeMap[ch] ?? ch)
}

export function usd(cents: number): string {
	return `$${(cents / 100).toFixed(2)}`
}

// -- top bar: Charter, Balance, Tokens, TrustScore, Health ---------------------

export function renderTopBar(state: AppState): string {
	const mission = state.charter ? state.charter.mission.split(/\s+/).slice(0, 5).join(" ") : "—"
	const balance = state.ledger ? usd(state.ledger.balance_usd_cents) : "—"
	const tokens = state.ledger ? String(state.ledger.total_tokens_spent) : "—"
	const trust = averageTrust(state)
	const recentEvents =
		state.lastEventAt !== null && Date.now() - state.lastEventAt < 30_000
	const health = state.gatewayUp ? (recentEvents ? "live" : "idle") : "down"
	return `<div class="topbar">
  <span class="stat charter-name" title="active charter">${esc(mission)}</span>
  <span class="stat">Balance <b data-field="balance">${balance}</b></span>
  <span class="stat">Tokens <b data-field="tokens">${tokens}</b></span>
  <span class="stat">TrustScore <b data-field="trust">${trust ?? "—"}</b></span>
  <span class="stat health health-${health}" data-field="health">${health}</span>
</div>`
}

// -- command center: mission input + task DAG badges -----------------------------

const BADGE_ORDER: TaskBadge[] = ["pending", "running", "passed", "failed", "skipped"]

export function renderMissionForm(state: AppState): string {
	return `<form id="mission-form" class="mission-form">
  <input name="goal" placeholder="Describe the mission goal…" required>
  <input name="revenue" type="number" min="0" step="1" placeholder="revenue (cents)">
  <button type="submit">Launch mission</button>
  ${state.notice ? `<div class="notice">${esc(state.notice)}</div>` : ""}
</form>`
}

export function renderTaskDag(state: AppState): string {
	const detail = state.jobDetail
	if (!detail) {
		return `<div class="dag empty-msg">No job selected.</div>`
	}
	const badges = detail.task_states
	const rows = (detail.plan ?? []).map((task) => {
		const badge: TaskBadge = badges[task.task_id] ?? "pending"
		const deps = task.depends_on.length
			? `<span class="deps">after ${task.depends_on.map(esc).join(", ")}</span>`
			: `<span class="deps root">root</span>`
		return `<div class="dag-node" data-task="${esc(task.task_id)}">
    <span class="badge badge-${badge}" data-badge="${badge}">${badge}</span>
    <span class="task-id">${esc(task.task_id)}</span>
    <span class="skill">${esc(task.required_skill)}</span>
    ${deps}
  </div>`
	})
	if (rows.length === 0) {
		rows.push(`<div class="empty-msg">Plan not available yet.</div>`)
	}
	return `<div class="dag" data-job="${esc(detail.job_id)}">${rows.join("\n")}</div>`
}

export function badgeCounts(state: AppState): Record<TaskBadge, number> {
	const counts = Object.fromEntries(BADGE_ORDER.map((b) => [b, 0])) as Record<TaskBadge, number>
	for (const badge of Object.values(state.jobDetail?.task_states ?? {})) {
		counts[badge] += 1
	}
	return counts
}

// -- decision stream ---------------------------------------------------------------

export function renderDecisionStream(state: AppState): string {
	const rows = state.events.map(renderEventRow)
	return `<div class="stream" data-last-seq="${state.lastSeq}">
${rows.join("\n") || '<div class="empty-msg">No events yet.</div>'}
</div>`
}

export function renderEventRow(event: GovernanceEvent): string {
	const task = event.task_id ? ` <span class="ev-task">${esc(event.task_id)}</span>` : ""
	return `<div class="ev ev-${event.role.toLowerCase()}" data-seq="${event.seq}">
  <span class="ev-seq">${event.seq}</span>
  <span class="ev-role role-${event.role.toLowerCase()}">${event.role}</span>
  <span class="ev-msg">${esc(event.message)}</span>${task}
</div>`
}

// -- job queue ------------------------------------------------------------------------

export function renderJobQueue(state: AppState): string {
	const rows = state.jobs.map((job) => renderJobRow(job, state.selectedJobId))
	return `<table class="jobs">
<thead><tr><th>job</th><th>goal</th><th>state</th><th>revenue</th><th>actions</th></tr></thead>
<tbody>${rows.join("\n") || '<tr><td colspan="5" class="empty-msg">Queue is empty.</td></tr>'}</tbody>
</table>`
}

function renderJobRow(job: JobSummary, selectedId: string | null): string {
	const selected = job.job_id === selectedId ? " selected" : ""
	const revenue = job.revenue_usd_cents === null ? "—" : usd(job.revenue_usd_cents)
	const failure = job.failure_reason
		? `<div class="failure-reason">${esc(job.failure_reason)}</div>`
		: ""
	const retry =
		job.state === "FAILED"
			? `<button data-action="retry" data-job="${esc(job.job_id)}">Retry</button>`
			: ""
	const editable = job.state === "PENDING" || job.state === "FAILED"
	const edit = editable
		? `<button data-action="edit" data-job="${esc(job.job_id)}">Edit</button>`
		: ""
	return `<tr class="job-row state-${job.state.toLowerCase()}${selected}" data-job="${esc(job.job_id)}">
  <td>${esc(job.job_id)}</td>
  <td>${esc(job.goal)}${failure}</td>
  <td><span class="state state-${job.state.toLowerCase()}">${job.state}</span></td>
  <td>${revenue}</td>
  <td>
    <button data-action="view" data-job="${esc(job.job_id)}">View result</button>
    ${retry}${edit}
    <button data-action="delete" data-job="${esc(job.job_id)}">Delete</button>
  </td>
</tr>`
}

// -- charter editor ----------------------------------------------------------------------

export function renderCharterEditor(state: AppState): string {
	const charter = state.charter
	if (!charter) return `<div class="empty-msg">Charter not loaded.</div>`
	const fb = charter.fiscal_boundaries
	const errors = state.charterErrorPaths
		.map((path) => `<div class="field-error" data-path="${esc(path)}">invalid field: ${esc(path)}</div>`)
		.join("\n")
	const saved = state.charterSaved ? `<div class="saved">Charter saved.</div>` : ""
	return `<form id="charter-form" class="charter">
  ${errors}
  ${saved}
  <label>Mission <textarea name="mission">${esc(charter.mission)}</textarea></label>
  <label>Daily burn limit (USD) <input name="daily_burn_max_usd" type="number" step="0.01" value="${fb.daily_burn_max_usd}"></label>
  <label>Maximum budget (USD) <input name="max_budget_usd" type="number" step="0.01" value="${fb.max_budget_usd}"></label>
  <label>Currency <input name="currency" value="${esc(fb.currency)}"></label>
  <label>Margin floor <input name="min_job_margin_ratio" type="number" step="0.01" min="0" max="1" value="${fb.min_job_margin_ratio}"></label>
  <label>Minimum reserve (USD) <input name="min_reserve_usd" type="number" step="0.01" value="${fb.min_reserve_usd}"></label>
  <label>Competencies (JSON) <textarea name="core_competencies">${esc(JSON.stringify(charter.core_competencies, null, 1))}</textarea></label>
  <label>Success KPIs (JSON) <textarea name="success_kpis">${esc(JSON.stringify(charter.success_kpis, null, 1))}</textarea></label>
  <button type="submit">Save charter</button>
</form>`
}

// -- delivery + audit-failure detail -----------------------------------------------------

export function renderDeliveryDetail(state: AppState): string {
	const detail = state.jobDetail
	if (!detail) return `<div class="empty-msg">Select a job to inspect its delivery.</div>`
	const reports = new Map(reportsForJob(state).map((r) => [r.task_id, r]))
	const sections = (detail.plan ?? []).map((task) => {
		const report = reports.get(task.task_id)
		const output = detail.task_outputs[task.task_id]
		const mark = report ? (report.passed ? "✓ passed" : "✗ failed") : "not audited"
		const score = report ? ` score ${report.score}` : ""
		const reason = report ? `<div class="judge-reason">${esc(report.reason)}</div>` : ""
		const fix =
			report && report.suggested_fix
				? `<div class="judge-fix">suggested fix: ${esc(report.suggested_fix)}</div>`
				: ""
		return `<section class="task-output" data-task="${esc(task.task_id)}">
  <h4>${esc(task.task_id)} <span class="${report?.passed ? "pass" : "fail"}-mark">${mark}${score}</span></h4>
  ${reason}${fix}
  <pre>${esc(output ?? "(no output recorded)")}</pre>
</section>`
	})
	const exportButton = detail.deliverable
		? `<button data-action="export-markdown" data-job="${esc(detail.job_id)}">Download Markdown</button>`
		: ""
	return `<div class="delivery" data-job="${esc(detail.job_id)}">
  <h3>${esc(detail.goal)}</h3>
  ${detail.failure_reason ? `<div class="failure-reason">${esc(detail.failure_reason)}</div>` : ""}
  ${exportButton}
  ${sections.join("\n")}
</div>`
}

// -- whole page ----------------------------------------------------------------------------

export function renderApp(state: AppState): string {
	return `${renderTopBar(state)}
<main class="grid">
  <section class="panel" id="command-center">
    <h2>Command center</h2>
    ${renderMissionForm(state)}
    ${renderTaskDag(state)}
  </section>
  <section class="panel" id="decision-stream">
    <h2>Decision stream</h2>
    ${renderDecisionStream(state)}
  </section>
  <section class="panel" id="job-queue">
    <h2>Job queue</h2>
    ${renderJobQueue(state)}
  </section>
  <section class="panel" id="charter-editor">
    <h2>Charter</h2>
    ${renderCharterEditor(state)}
  </section>
  <section class="panel" id="delivery">
    <h2>Delivery</h2>
    ${renderDeliveryDetail(state)}
  </section>
</main>`
}
