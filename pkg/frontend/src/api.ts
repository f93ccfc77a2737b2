// Typed fetch client for the gateway. Unwraps the response envelope and
// converts error envelopes into ApiError (carrying the machine code and,
// for charter validation, the offending field paths).

import type {
	AuditReportView,
	CharterDocument,
	Envelope,
	EventPage,
	GovernanceEvent,
	HealthInfo,
	JobDetail,
	JobSummary,
	LedgerSummary,
	TokensSummary,
	TrustSummary,
} from "./types.js"

export class ApiError extends Error {
	readonly code: string
	readonly status: number
	readonly paths: string[]

	constructor(code: string, message: string, status: number, paths: string[] = []) {
		super(message)
		this.code = code
		this.status = status
		this.paths = paths
	}
}

async function unwrap<T>(response: Response): Promise<T> {
	const body = (await response.json()) as Envelope<T>
	if (!body.ok || body.data === null) {
		const err = body.error ?? { code: "UNKNOWN", message: "malformed envelope" }
		throw new ApiError(err.code, err.message, response.status, err.paths ?? [])
	}
	return body.data
}

export class GatewayClient {
	constructor(readonly baseUrl: string) {}

	private async request<T>(path: string, init?: RequestInit): Promise<T> {
		const response = await fetch(`${this.baseUrl}${path}`, {
			headers: { "content-type": "application/json" },
			...init,
		})
		return unwrap<T>(response)
	}

	submitMission(goal: string, revenueCents?: number): Promise<JobSummary> {
		return this.request("/missions", {
			method: "POST",
			body: JSON.stringify({ goal, revenue_cents: revenueCents ?? null }),
		})
	}

	async jobs(): Promise<JobSummary[]> {
		const data = await this.request<{ jobs: JobSummary[] }>("/jobs")
		return data.jobs
	}

	job(jobId: string): Promise<JobDetail> {
		return this.request(`/jobs/${jobId}`)
	}

	retryJob(jobId: string): Promise<JobSummary> {
		return this.request(`/jobs/${jobId}/retry`, { method: "POST" })
	}

	editJob(jobId: string, patch: { goal?: string; revenue_cents?: number }): Promise<JobSummary> {
		return this.request(`/jobs/${jobId}`, { method: "PATCH", body: JSON.stringify(patch) })
	}

	deleteJob(jobId: string): Promise<{ deleted: string }> {
		return this.request(`/jobs/${jobId}`, { method: "DELETE" })
	}

	// Long-poll: the gateway holds the request until events newer than
	// `since` exist or the timeout lapses.
	events(since: number, timeoutS = 25): Promise<EventPage> {
		return this.request(`/events?since=${since}&timeout=${timeoutS}`)
	}

	async charter(): Promise<CharterDocument> {
		const data = await this.request<{ charter: CharterDocument }>("/charter")
		return data.charter
	}

	async saveCharter(document: CharterDocument): Promise<CharterDocument> {
		const data = await this.request<{ charter: CharterDocument }>("/charter", {
			method: "PUT",
			body: JSON.stringify({ charter: document }),
		})
		return data.charter
	}

	ledger(): Promise<LedgerSummary> {
		return this.request("/ledger")
	}

	trust(): Promise<TrustSummary> {
		return this.request("/trust")
	}

	tokens(): Promise<TokensSummary> {
		return this.request("/tokens")
	}

	async auditTrail(): Promise<AuditReportView[]> {
		const data = await this.request<{ reports: AuditReportView[] }>("/audit-trail")
		return data.reports
	}

	health(): Promise<HealthInfo> {
		return this.request("/health")
	}

	verifyTrail(): Promise<{ total: number; failures: number[] }> {
		return this.request("/verify-trail", { method: "POST" })
	}
}

export type { GovernanceEvent }
