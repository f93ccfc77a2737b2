// Wire types for the gateway API. Every response is enveloped; errors carry
// a stable machine code, and charter validation errors list the offending
// field paths.

export interface Envelope<T> {
	ok: boolean
	data: T | null
	error: ApiErrorBody | null
}

export interface ApiErrorBody {
	code: string
	message: string
	paths?: string[]
}

export type JobStateName = "PENDING" | "APPROVED" | "RUNNING" | "COMPLETED" | "FAILED"

export type TaskBadge = "pending" | "running" | "passed" | "failed" | "skipped"

export interface JobSummary {
	job_id: string
	goal: string
	revenue_usd_cents: number | null
	state: JobStateName
	failure_reason: string | null
	task_states: Record<string, TaskBadge>
	retries: number
}

export interface PlannedTaskView {
	task_id: string
	description: string
	depends_on: string[]
	required_skill: string
	estimated_token_budget: number
	priority: "HIGH" | "LOW"
	estimated_cost_usd_cents: number
}

export interface JobDetail extends JobSummary {
	deliverable: string | null
	task_outputs: Record<string, string>
	plan: PlannedTaskView[] | null
}

export type RoleName = "SYSTEM" | "CEO" | "CFO" | "AUDIT"

export interface GovernanceEvent {
	seq: number
	timestamp_utc: string
	role: RoleName
	message: string
	job_id: string | null
	task_id: string | null
	payload: Record<string, unknown>
}

export interface EventPage {
	events: GovernanceEvent[]
	next_since: number
}

export interface LedgerSummary {
	balance_usd_cents: number
	daily_debits_usd_cents: number
	total_tokens_spent: number
	entry_count: number
	runway_usd_cents: number
}

export interface TrustSummary {
	agents: Record<string, number>
	base_score: number
	thresholds: Record<string, number>
}

export interface TokenUsageRow {
	task_id: string | null
	agent_id: string | null
	tokens: number
}

export interface TokensSummary {
	usage: TokenUsageRow[]
	total_tokens: number
}

export interface CharterDocument {
	mission: string
	core_competencies: { name: string; description: string; priority: number }[]
	fiscal_boundaries: {
		daily_burn_max_usd: number
		max_budget_usd: number
		currency: string
		min_job_margin_ratio: number
		min_reserve_usd: number
	}
	success_kpis: {
		name: string
		metric: string
		target_value: number
		unit: string
		verification_prompt: string
	}[]
}

export interface AuditReportView {
	task_id: string
	kpi_name: string
	passed: boolean
	score: number
	reason: string
	suggested_fix: string | null
	timestamp_utc: string
	proof_hash: string
}

export interface HealthInfo {
	status: string
	last_event_seq: number
	time_utc: string
}
