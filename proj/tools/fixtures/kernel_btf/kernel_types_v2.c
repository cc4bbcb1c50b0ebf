// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

/* Target-BTF fixture, "6.10" flavor: the same named context structs but
 * with inserted and reordered fields, so loading the fixture objects against
 * this BTF exercises real CO-RE offset rewriting. Extracted into
 * tests/fixtures/btf/6.10/vmlinux.btf by the rebuild script. */

typedef unsigned long long u64;
typedef unsigned int u32;

struct trace_exec_ctx {
	u64 cgroup_id; /* inserted: shifts pid to 8 and comm to 12 */
	int pid;
	char comm[16];
};

struct open_ctx {
	int flags; /* reordered: pid moves to offset 4 */
	int pid;
};

struct xdp_ctx {
	u32 rx_queue; /* inserted: pkt_len moves to offset 4 */
	u32 pkt_len;
};

/* x86_64 register frame, unchanged between flavors. */
struct pt_regs {
	u64 r15, r14, r13, r12, bp, bx, r11, r10;
	u64 r9, r8, ax, cx, dx, si, di;
	u64 orig_ax, ip, cs, flags, sp, ss;
};

void *fixture_btf_anchor(struct trace_exec_ctx *a, struct open_ctx *b,
			 struct xdp_ctx *c, struct pt_regs *d)
{
	return (void *)((unsigned long)a ^ (unsigned long)b ^
			(unsigned long)c ^ (unsigned long)d);
}
