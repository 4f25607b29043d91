/* Max-weight matching on general graphs (blossom algorithm).
 *
 * Primal-dual method with explicit blossom shrinking, following the classic
 * O(n^3) structure: repeated stages grow alternating trees from all exposed
 * vertices simultaneously, shrink odd cycles into blossoms, and adjust dual
 * variables until an augmenting path appears or the duals prove optimality.
 * The matching maximizes total weight; it need not be perfect, and isolated
 * or unprofitable vertices stay exposed.
 *
 * Weights arrive as int64. Internally duals live in doubles and every
 * quantity is a multiple of 1/2; below 2^52 such values are exact in IEEE
 * doubles, so all comparisons are exact and termination is guaranteed.
 * Callers keep |weight| <= 2^49.
 *
 * Exposed to Python as _blossom.solve(n, u_bytes, v_bytes, w_bytes) where
 * u, v are contiguous int32 arrays and w is int64, returning the mate array
 * as int32 bytes (-1 for exposed vertices). decode_shots() builds on the
 * same core to pair defect batches against a precomputed distance table.
 */

#define PY_SSIZE_T_CLEAN
#include <Python.h>
#include <math.h>
#include <stdlib.h>
#include <string.h>

typedef struct {
    int *data;
    int len;
} IntList;

typedef struct {
    int n;       /* vertices */
    int m;       /* edges */
    int nb;      /* 2n blossom slots */
    const int *eu;
    const int *ev;
    double *wt;  /* edge weight, from int64 input */

    int *endpoint;    /* 2m: endpoint[p] = vertex at endpoint p */
    int *adj;         /* 2m: remote endpoints, CSR by vertex */
    int *adj_start;   /* n+1 */

    int *mate;        /* n: remote endpoint or -1 */
    int *label;       /* nb: 0 free, 1 S, 2 T, |4 breadcrumb */
    int *labelend;    /* nb */
    int *inblossom;   /* n */
    int *blossomparent; /* nb */
    int *blossombase;   /* nb */
    IntList *childs;    /* nb */
    IntList *endps;     /* nb */
    int *bestedge;      /* nb */
    IntList *bestedges; /* nb: candidate least-slack edge lists */
    double *dualvar;    /* nb */
    char *allowedge;    /* m */

    int *queue;
    int qlen, qcap;
    int *unused;      /* stack of free blossom ids */
    int unusedlen;

    int *bestedgeto;  /* nb scratch for add_blossom */
    int *leafbuf;     /* n scratch */
    int err;          /* set on broken invariant */
} Ctx;

static double slack(Ctx *c, int k)
{
    return c->dualvar[c->eu[k]] + c->dualvar[c->ev[k]] - 2.0 * c->wt[k];
}

static int queue_push(Ctx *c, int v)
{
    if (c->qlen == c->qcap) {
        int ncap = c->qcap * 2 + 16;
        int *nq = (int *)realloc(c->queue, (size_t)ncap * sizeof(int));
        if (!nq) { c->err = 2; return -1; }
        c->queue = nq;
        c->qcap = ncap;
    }
    c->queue[c->qlen++] = v;
    return 0;
}

static void list_free(IntList *l)
{
    free(l->data);
    l->data = NULL;
    l->len = 0;
}

/* Collect the vertices contained in blossom b into out; returns count. */
static int blossom_leaves(Ctx *c, int b, int *out, int cnt)
{
    if (b < c->n) {
        out[cnt++] = b;
        return cnt;
    }
    for (int i = 0; i < c->childs[b].len; i++)
        cnt = blossom_leaves(c, c->childs[b].data[i], out, cnt);
    return cnt;
}

static void assign_label(Ctx *c, int w, int t, int p)
{
    int b = c->inblossom[w];
    if (c->err || c->label[w] != 0 || c->label[b] != 0) { c->err = 1; return; }
    c->label[w] = c->label[b] = t;
    c->labelend[w] = c->labelend[b] = p;
    c->bestedge[w] = c->bestedge[b] = -1;
    if (t == 1) {
        int cnt = blossom_leaves(c, b, c->leafbuf, 0);
        for (int i = 0; i < cnt; i++)
            if (queue_push(c, c->leafbuf[i]))
                return;
    } else if (t == 2) {
        int base = c->blossombase[b];
        if (c->mate[base] < 0) { c->err = 1; return; }
        assign_label(c, c->endpoint[c->mate[base]], 1, c->mate[base] ^ 1);
    }
}

/* Trace back from v and w; return base of a new blossom, or -1 if the
 * paths hit two different roots (an augmenting path exists). */
static int scan_blossom(Ctx *c, int v, int w, int *path, int *pathlen)
{
    int base = -1;
    *pathlen = 0;
    while (v != -1 || w != -1) {
        int b = c->inblossom[v];
        if (c->label[b] & 4) {
            base = c->blossombase[b];
            break;
        }
        if (c->label[b] != 1) { c->err = 1; return -1; }
        path[(*pathlen)++] = b;
        c->label[b] = 5;
        if (c->labelend[b] == -1) {
            v = -1;
        } else {
            v = c->endpoint[c->labelend[b]];
            b = c->inblossom[v];
            if (c->label[b] != 2) { c->err = 1; return -1; }
            if (c->labelend[b] < 0) { c->err = 1; return -1; }
            v = c->endpoint[c->labelend[b]];
        }
        if (w != -1) {
            int tmp = v; v = w; w = tmp;
        }
    }
    for (int i = 0; i < *pathlen; i++)
        c->label[path[i]] = 1;
    return base;
}

/* Shrink the cycle through edge k and base into a new blossom. */
static void add_blossom(Ctx *c, int base, int k)
{
    int v = c->eu[k], w = c->ev[k];
    int bb = c->inblossom[base];
    int bv = c->inblossom[v];
    int bw = c->inblossom[w];
    if (c->unusedlen == 0) { c->err = 1; return; }
    int b = c->unused[--c->unusedlen];

    c->blossombase[b] = base;
    c->blossomparent[b] = -1;
    c->blossomparent[bb] = b;

    /* Collect the cycle: walk v's side back to the base, reverse, append
     * the connecting edge, then walk w's side. */
    int cap = 8, plen = 0, elen = 0;
    int *path = (int *)malloc((size_t)cap * sizeof(int));
    int *eps = (int *)malloc((size_t)cap * sizeof(int));
    if (!path || !eps) { free(path); free(eps); c->err = 2; return; }

#define GROW(arr, len) \
    do { \
        if ((len) == cap) { \
            cap *= 2; \
            int *np_ = (int *)realloc(path, (size_t)cap * sizeof(int)); \
            int *ne_ = (int *)realloc(eps, (size_t)cap * sizeof(int)); \
            if (!np_ || !ne_) { free(np_ ? np_ : path); free(ne_ ? ne_ : eps); c->err = 2; return; } \
            path = np_; eps = ne_; \
        } \
    } while (0)

    while (bv != bb) {
        c->blossomparent[bv] = b;
        GROW(path, plen);
        path[plen++] = bv;
        eps[elen++] = c->labelend[bv];
        if (c->labelend[bv] < 0) { c->err = 1; free(path); free(eps); return; }
        v = c->endpoint[c->labelend[bv]];
        bv = c->inblossom[v];
    }
    GROW(path, plen);
    path[plen++] = bb;
    /* reverse both lists, then add the S-S edge endpoint */
    for (int i = 0, j = plen - 1; i < j; i++, j--) {
        int t = path[i]; path[i] = path[j]; path[j] = t;
    }
    for (int i = 0, j = elen - 1; i < j; i++, j--) {
        int t = eps[i]; eps[i] = eps[j]; eps[j] = t;
    }
    GROW(path, elen);
    eps[elen++] = 2 * k;
    while (bw != bb) {
        c->blossomparent[bw] = b;
        GROW(path, plen);
        path[plen++] = bw;
        eps[elen++] = c->labelend[bw] ^ 1;
        if (c->labelend[bw] < 0) { c->err = 1; free(path); free(eps); return; }
        w = c->endpoint[c->labelend[bw]];
        bw = c->inblossom[w];
    }
#undef GROW

    c->childs[b].data = path;
    c->childs[b].len = plen;
    c->endps[b].data = eps;
    c->endps[b].len = elen;

    if (c->label[bb] != 1) { c->err = 1; return; }
    c->label[b] = 1;
    c->labelend[b] = c->labelend[bb];
    c->dualvar[b] = 0.0;

    int cnt = blossom_leaves(c, b, c->leafbuf, 0);
    for (int i = 0; i < cnt; i++) {
        int lv = c->leafbuf[i];
        if (c->label[c->inblossom[lv]] == 2)
            if (queue_push(c, lv))
                return;
        c->inblossom[lv] = b;
    }

    /* Merge least-slack candidate edges of the children. */
    for (int i = 0; i < c->nb; i++)
        c->bestedgeto[i] = -1;
    for (int ci = 0; ci < plen; ci++) {
        int child = path[ci];
        if (c->bestedges[child].data == NULL) {
            /* no cached list: examine all edges of the child's vertices */
            int lc = blossom_leaves(c, child, c->leafbuf, 0);
            for (int li = 0; li < lc; li++) {
                int lv = c->leafbuf[li];
                for (int p = c->adj_start[lv]; p < c->adj_start[lv + 1]; p++) {
                    int ek = c->adj[p] >> 1;
                    int j = c->eu[ek];
                    if (c->inblossom[j] == b)
                        j = c->ev[ek];
                    int bj = c->inblossom[j];
                    if (bj != b && c->label[bj] == 1 &&
                        (c->bestedgeto[bj] == -1 ||
                         slack(c, ek) < slack(c, c->bestedgeto[bj])))
                        c->bestedgeto[bj] = ek;
                }
            }
        } else {
            for (int li = 0; li < c->bestedges[child].len; li++) {
                int ek = c->bestedges[child].data[li];
                int j = c->eu[ek];
                if (c->inblossom[j] == b)
                    j = c->ev[ek];
                int bj = c->inblossom[j];
                if (bj != b && c->label[bj] == 1 &&
                    (c->bestedgeto[bj] == -1 ||
                     slack(c, ek) < slack(c, c->bestedgeto[bj])))
                    c->bestedgeto[bj] = ek;
            }
        }
        list_free(&c->bestedges[child]);
        c->bestedge[child] = -1;
    }
    int nbest = 0;
    for (int i = 0; i < c->nb; i++)
        if (c->bestedgeto[i] != -1)
            nbest++;
    int *bl = (int *)malloc((size_t)(nbest > 0 ? nbest : 1) * sizeof(int));
    if (!bl) { c->err = 2; return; }
    nbest = 0;
    for (int i = 0; i < c->nb; i++)
        if (c->bestedgeto[i] != -1)
            bl[nbest++] = c->bestedgeto[i];
    c->bestedges[b].data = bl;
    c->bestedges[b].len = nbest;

    c->bestedge[b] = -1;
    for (int i = 0; i < nbest; i++)
        if (c->bestedge[b] == -1 || slack(c, bl[i]) < slack(c, c->bestedge[b]))
            c->bestedge[b] = bl[i];
}

static void expand_blossom(Ctx *c, int b, int endstage)
{
    for (int i = 0; i < c->childs[b].len && !c->err; i++) {
        int s = c->childs[b].data[i];
        c->blossomparent[s] = -1;
        if (s < c->n) {
            c->inblossom[s] = s;
        } else if (endstage && c->dualvar[s] == 0.0) {
            expand_blossom(c, s, endstage);
        } else {
            int cnt = blossom_leaves(c, s, c->leafbuf, 0);
            for (int li = 0; li < cnt; li++)
                c->inblossom[c->leafbuf[li]] = s;
        }
    }
    if (c->err)
        return;

    if (!endstage && c->label[b] == 2) {
        /* T-blossom expanded mid-stage: relabel the even-length side of the
         * cycle between the entry child and the base, clear the rest. */
        if (c->labelend[b] < 0) { c->err = 1; return; }
        int entrychild = c->inblossom[c->endpoint[c->labelend[b] ^ 1]];
        int nch = c->childs[b].len;
        int j = -1;
        for (int i = 0; i < nch; i++)
            if (c->childs[b].data[i] == entrychild) { j = i; break; }
        if (j < 0) { c->err = 1; return; }
        int jstep, endptrick;
        if (j & 1) {
            j -= nch;
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
#define CHILD(idx) c->childs[b].data[((idx) % nch + nch) % nch]
#define ENDP(idx) c->endps[b].data[((idx) % nch + nch) % nch]
        int p = c->labelend[b];
        while (j != 0) {
            c->label[c->endpoint[p ^ 1]] = 0;
            c->label[c->endpoint[ENDP(j - endptrick) ^ endptrick ^ 1]] = 0;
            assign_label(c, c->endpoint[p ^ 1], 2, p);
            if (c->err) return;
            c->allowedge[ENDP(j - endptrick) >> 1] = 1;
            j += jstep;
            p = ENDP(j - endptrick) ^ endptrick;
            c->allowedge[p >> 1] = 1;
            j += jstep;
        }
        int bv = CHILD(j);
        c->label[c->endpoint[p ^ 1]] = c->label[bv] = 2;
        c->labelend[c->endpoint[p ^ 1]] = c->labelend[bv] = p;
        c->bestedge[bv] = -1;
        j += jstep;
        while (CHILD(j) != entrychild) {
            bv = CHILD(j);
            if (c->label[bv] == 1) {
                j += jstep;
                continue;
            }
            int cnt = blossom_leaves(c, bv, c->leafbuf, 0);
            int lv = -1;
            for (int li = 0; li < cnt; li++)
                if (c->label[c->leafbuf[li]] != 0) { lv = c->leafbuf[li]; break; }
            if (lv >= 0) {
                if (c->label[lv] != 2 || c->inblossom[lv] != bv) { c->err = 1; return; }
                c->label[lv] = 0;
                c->label[c->endpoint[c->mate[c->blossombase[bv]]]] = 0;
                assign_label(c, lv, 2, c->labelend[lv]);
                if (c->err) return;
            }
            j += jstep;
        }
#undef CHILD
#undef ENDP
    }
    c->label[b] = -1;
    c->labelend[b] = -1;
    list_free(&c->childs[b]);
    list_free(&c->endps[b]);
    c->blossombase[b] = -1;
    list_free(&c->bestedges[b]);
    c->bestedge[b] = -1;
    c->unused[c->unusedlen++] = b;
}

/* Swap matched/unmatched edges around blossom b so that vertex v becomes
 * its base. */
static void augment_blossom(Ctx *c, int b, int v)
{
    int t = v;
    while (c->blossomparent[t] != b)
        t = c->blossomparent[t];
    if (t >= c->n) {
        augment_blossom(c, t, v);
        if (c->err) return;
    }
    int nch = c->childs[b].len;
    int i = -1;
    for (int x = 0; x < nch; x++)
        if (c->childs[b].data[x] == t) { i = x; break; }
    if (i < 0) { c->err = 1; return; }
    int j = i, jstep, endptrick;
    if (i & 1) {
        j -= nch;
        jstep = 1;
        endptrick = 0;
    } else {
        jstep = -1;
        endptrick = 1;
    }
#define CHILD(idx) c->childs[b].data[((idx) % nch + nch) % nch]
#define ENDP(idx) c->endps[b].data[((idx) % nch + nch) % nch]
    while (j != 0) {
        j += jstep;
        t = CHILD(j);
        int p = ENDP(j - endptrick) ^ endptrick;
        if (t >= c->n) {
            augment_blossom(c, t, c->endpoint[p]);
            if (c->err) return;
        }
        j += jstep;
        t = CHILD(j);
        if (t >= c->n) {
            augment_blossom(c, t, c->endpoint[p ^ 1]);
            if (c->err) return;
        }
        c->mate[c->endpoint[p]] = p ^ 1;
        c->mate[c->endpoint[p ^ 1]] = p;
    }
#undef CHILD
#undef ENDP
    /* rotate children so the entry vertex's subtree is first */
    if (i > 0) {
        int *nc = (int *)malloc((size_t)nch * sizeof(int));
        int *ne = (int *)malloc((size_t)nch * sizeof(int));
        if (!nc || !ne) { free(nc); free(ne); c->err = 2; return; }
        for (int x = 0; x < nch; x++) {
            nc[x] = c->childs[b].data[(x + i) % nch];
            ne[x] = c->endps[b].data[(x + i) % nch];
        }
        memcpy(c->childs[b].data, nc, (size_t)nch * sizeof(int));
        memcpy(c->endps[b].data, ne, (size_t)nch * sizeof(int));
        free(nc);
        free(ne);
    }
    c->blossombase[b] = c->blossombase[c->childs[b].data[0]];
    if (c->blossombase[b] != v)
        c->err = 1;
}

/* Augment along the path through edge k between two S-trees. */
static void augment_matching(Ctx *c, int k)
{
    for (int side = 0; side < 2; side++) {
        int s = side == 0 ? c->eu[k] : c->ev[k];
        int p = side == 0 ? 2 * k + 1 : 2 * k;
        for (;;) {
            int bs = c->inblossom[s];
            if (c->label[bs] != 1) { c->err = 1; return; }
            if (bs >= c->n) {
                augment_blossom(c, bs, s);
                if (c->err) return;
            }
            c->mate[s] = p;
            if (c->labelend[bs] == -1)
                break;
            int t = c->endpoint[c->labelend[bs]];
            int bt = c->inblossom[t];
            if (c->label[bt] != 2 || c->labelend[bt] < 0) { c->err = 1; return; }
            s = c->endpoint[c->labelend[bt]];
            int jj = c->endpoint[c->labelend[bt] ^ 1];
            if (c->blossombase[bt] != t) { c->err = 1; return; }
            if (bt >= c->n) {
                augment_blossom(c, bt, jj);
                if (c->err) return;
            }
            c->mate[jj] = c->labelend[bt];
            p = c->labelend[bt] ^ 1;
        }
    }
}

static int run(Ctx *c)
{
    int n = c->n, m = c->m, nb = c->nb;
    if (m == 0)
        return 0;

    for (int t = 0; t < n && !c->err; t++) {
        memset(c->label, 0, (size_t)nb * sizeof(int));
        for (int i = 0; i < nb; i++)
            c->bestedge[i] = -1;
        for (int i = n; i < nb; i++)
            list_free(&c->bestedges[i]);
        memset(c->allowedge, 0, (size_t)m);
        c->qlen = 0;

        for (int v = 0; v < n; v++)
            if (c->mate[v] == -1 && c->label[c->inblossom[v]] == 0) {
                assign_label(c, v, 1, -1);
                if (c->err) return -1;
            }

        int augmented = 0;
        for (;;) {
            while (c->qlen > 0 && !augmented && !c->err) {
                int v = c->queue[--c->qlen];
                if (c->label[c->inblossom[v]] != 1) { c->err = 1; break; }
                for (int pi = c->adj_start[v]; pi < c->adj_start[v + 1]; pi++) {
                    int p = c->adj[pi];
                    int k = p >> 1;
                    int w = c->endpoint[p];
                    if (c->inblossom[v] == c->inblossom[w])
                        continue;
                    double kslack = 0.0;
                    if (!c->allowedge[k]) {
                        kslack = slack(c, k);
                        if (kslack <= 0.0)
                            c->allowedge[k] = 1;
                    }
                    if (c->allowedge[k]) {
                        int bw = c->inblossom[w];
                        if (c->label[bw] == 0) {
                            assign_label(c, w, 2, p ^ 1);
                        } else if (c->label[bw] == 1) {
                            int pathlen = 0;
                            /* leafbuf doubles as breadcrumb scratch here */
                            int base = scan_blossom(c, v, w, c->leafbuf,
                                                    &pathlen);
                            if (base >= 0)
                                add_blossom(c, base, k);
                            else if (base == -1 && !c->err) {
                                augment_matching(c, k);
                                augmented = 1;
                            }
                        } else if (c->label[w] == 0) {
                            c->label[w] = 2;
                            c->labelend[w] = p ^ 1;
                        }
                    } else if (c->label[c->inblossom[w]] == 1) {
                        int b = c->inblossom[v];
                        if (c->bestedge[b] == -1 ||
                            kslack < slack(c, c->bestedge[b]))
                            c->bestedge[b] = k;
                    } else if (c->label[w] == 0) {
                        if (c->bestedge[w] == -1 ||
                            kslack < slack(c, c->bestedge[w]))
                            c->bestedge[w] = k;
                    }
                    if (c->err || augmented)
                        break;
                }
            }
            if (augmented || c->err)
                break;

            /* No augmenting path at current duals: adjust them. */
            int deltatype = 1;
            double delta = 0.0;
            int deltaedge = -1, deltablossom = -1;
            delta = c->dualvar[0];
            for (int v = 1; v < n; v++)
                if (c->dualvar[v] < delta)
                    delta = c->dualvar[v];
            for (int v = 0; v < n; v++)
                if (c->label[c->inblossom[v]] == 0 && c->bestedge[v] != -1) {
                    double d = slack(c, c->bestedge[v]);
                    if (d < delta) {
                        delta = d;
                        deltatype = 2;
                        deltaedge = c->bestedge[v];
                    }
                }
            for (int b = 0; b < nb; b++)
                if (c->blossomparent[b] == -1 && c->label[b] == 1 &&
                    c->bestedge[b] != -1) {
                    double d = slack(c, c->bestedge[b]) / 2.0;
                    if (d < delta) {
                        delta = d;
                        deltatype = 3;
                        deltaedge = c->bestedge[b];
                    }
                }
            for (int b = n; b < nb; b++)
                if (c->blossombase[b] >= 0 && c->blossomparent[b] == -1 &&
                    c->label[b] == 2 && c->dualvar[b] < delta) {
                    delta = c->dualvar[b];
                    deltatype = 4;
                    deltablossom = b;
                }
            if (delta < 0.0)
                delta = 0.0; /* only possible for deltatype 1 at optimum */

            for (int v = 0; v < n; v++) {
                int lbl = c->label[c->inblossom[v]];
                if (lbl == 1)
                    c->dualvar[v] -= delta;
                else if (lbl == 2)
                    c->dualvar[v] += delta;
            }
            for (int b = n; b < nb; b++)
                if (c->blossombase[b] >= 0 && c->blossomparent[b] == -1) {
                    if (c->label[b] == 1)
                        c->dualvar[b] += delta;
                    else if (c->label[b] == 2)
                        c->dualvar[b] -= delta;
                }

            if (deltatype == 1) {
                break; /* optimum reached */
            } else if (deltatype == 2) {
                c->allowedge[deltaedge] = 1;
                int i = c->eu[deltaedge];
                if (c->label[c->inblossom[i]] == 0)
                    i = c->ev[deltaedge];
                if (c->label[c->inblossom[i]] != 1) { c->err = 1; break; }
                if (queue_push(c, i)) break;
            } else if (deltatype == 3) {
                c->allowedge[deltaedge] = 1;
                if (queue_push(c, c->eu[deltaedge])) break;
            } else {
                expand_blossom(c, deltablossom, 0);
                if (c->err) break;
            }
        }

        if (!augmented || c->err)
            break;

        for (int b = n; b < nb; b++)
            if (c->blossomparent[b] == -1 && c->blossombase[b] >= 0 &&
                c->label[b] == 1 && c->dualvar[b] == 0.0) {
                expand_blossom(c, b, 1);
                if (c->err) break;
            }
    }

    if (c->err)
        return -1;
    for (int v = 0; v < n; v++)
        if (c->mate[v] >= 0)
            c->mate[v] = c->endpoint[c->mate[v]];
    return 0;
}

static void ctx_free(Ctx *ctx)
{
    free(ctx->wt);
    free(ctx->endpoint);
    free(ctx->adj);
    free(ctx->adj_start);
    free(ctx->mate);
    free(ctx->label);
    free(ctx->labelend);
    free(ctx->inblossom);
    free(ctx->blossomparent);
    free(ctx->blossombase);
    if (ctx->childs)
        for (int b = 0; b < ctx->nb; b++)
            list_free(&ctx->childs[b]);
    free(ctx->childs);
    if (ctx->endps)
        for (int b = 0; b < ctx->nb; b++)
            list_free(&ctx->endps[b]);
    free(ctx->endps);
    free(ctx->bestedge);
    if (ctx->bestedges)
        for (int b = 0; b < ctx->nb; b++)
            list_free(&ctx->bestedges[b]);
    free(ctx->bestedges);
    free(ctx->dualvar);
    free(ctx->allowedge);
    free(ctx->unused);
    free(ctx->bestedgeto);
    free(ctx->leafbuf);
    free(ctx->queue);
    memset(ctx, 0, sizeof(*ctx));
}

/* Allocate and initialize a solver context; returns 0, or 2 on OOM. */
static int ctx_init(Ctx *ctx, int n, int m, const int *eu, const int *ev,
                    const long long *wraw)
{
    memset(ctx, 0, sizeof(*ctx));
    ctx->n = n;
    ctx->m = m;
    ctx->nb = 2 * n;
    ctx->eu = eu;
    ctx->ev = ev;

    ctx->wt = (double *)malloc((size_t)(m > 0 ? m : 1) * sizeof(double));
    ctx->endpoint =
        (int *)malloc((size_t)(2 * m > 0 ? 2 * m : 1) * sizeof(int));
    ctx->adj = (int *)malloc((size_t)(2 * m > 0 ? 2 * m : 1) * sizeof(int));
    ctx->adj_start = (int *)calloc((size_t)n + 1, sizeof(int));
    ctx->mate = (int *)malloc((size_t)n * sizeof(int));
    ctx->label = (int *)calloc((size_t)ctx->nb, sizeof(int));
    ctx->labelend = (int *)malloc((size_t)ctx->nb * sizeof(int));
    ctx->inblossom = (int *)malloc((size_t)n * sizeof(int));
    ctx->blossomparent = (int *)malloc((size_t)ctx->nb * sizeof(int));
    ctx->blossombase = (int *)malloc((size_t)ctx->nb * sizeof(int));
    ctx->childs = (IntList *)calloc((size_t)ctx->nb, sizeof(IntList));
    ctx->endps = (IntList *)calloc((size_t)ctx->nb, sizeof(IntList));
    ctx->bestedge = (int *)malloc((size_t)ctx->nb * sizeof(int));
    ctx->bestedges = (IntList *)calloc((size_t)ctx->nb, sizeof(IntList));
    ctx->dualvar = (double *)malloc((size_t)ctx->nb * sizeof(double));
    ctx->allowedge = (char *)calloc((size_t)(m > 0 ? m : 1), 1);
    ctx->unused = (int *)malloc((size_t)n * sizeof(int));
    ctx->bestedgeto = (int *)malloc((size_t)ctx->nb * sizeof(int));
    ctx->leafbuf = (int *)malloc((size_t)n * sizeof(int));
    if (!ctx->wt || !ctx->endpoint || !ctx->adj || !ctx->adj_start ||
        !ctx->mate || !ctx->label || !ctx->labelend || !ctx->inblossom ||
        !ctx->blossomparent || !ctx->blossombase || !ctx->childs ||
        !ctx->endps || !ctx->bestedge || !ctx->bestedges || !ctx->dualvar ||
        !ctx->allowedge || !ctx->unused || !ctx->bestedgeto ||
        !ctx->leafbuf) {
        return 2;
    }

    double maxweight = 0.0;
    for (int k = 0; k < m; k++) {
        ctx->wt[k] = (double)wraw[k];
        if (ctx->wt[k] > maxweight)
            maxweight = ctx->wt[k];
    }
    for (int k = 0; k < m; k++) {
        ctx->endpoint[2 * k] = eu[k];
        ctx->endpoint[2 * k + 1] = ev[k];
        ctx->adj_start[eu[k] + 1]++;
        ctx->adj_start[ev[k] + 1]++;
    }
    for (int v = 0; v < n; v++)
        ctx->adj_start[v + 1] += ctx->adj_start[v];
    {
        int *fill = (int *)malloc((size_t)n * sizeof(int));
        if (!fill)
            return 2;
        memcpy(fill, ctx->adj_start, (size_t)n * sizeof(int));
        for (int k = 0; k < m; k++) {
            ctx->adj[fill[eu[k]]++] = 2 * k + 1;
            ctx->adj[fill[ev[k]]++] = 2 * k;
        }
        free(fill);
    }
    for (int v = 0; v < n; v++) {
        ctx->mate[v] = -1;
        ctx->inblossom[v] = v;
        ctx->dualvar[v] = maxweight;
    }
    for (int b = 0; b < ctx->nb; b++) {
        ctx->labelend[b] = -1;
        ctx->blossomparent[b] = -1;
        ctx->bestedge[b] = -1;
        ctx->blossombase[b] = b < n ? b : -1;
        if (b >= n)
            ctx->dualvar[b] = 0.0;
    }
    ctx->unusedlen = 0;
    for (int b = n; b < ctx->nb; b++)
        ctx->unused[ctx->unusedlen++] = b;
    return 0;
}

/* Solve one instance; mate_out must hold n ints. Returns 0, or 1 on a
 * broken invariant, 2 on OOM. */
static int solve_matching_arrays(int n, int m, const int *eu, const int *ev,
                                 const long long *wraw, int *mate_out)
{
    if (n == 0)
        return 0;
    Ctx ctx;
    int rc = ctx_init(&ctx, n, m, eu, ev, wraw);
    if (rc == 0)
        rc = run(&ctx) == 0 ? 0 : (ctx.err ? ctx.err : 1);
    if (rc == 0)
        memcpy(mate_out, ctx.mate, (size_t)n * sizeof(int));
    ctx_free(&ctx);
    return rc;
}

static PyObject *blossom_solve(PyObject *self, PyObject *args)
{
    int n;
    Py_buffer ub, vb, wb;
    if (!PyArg_ParseTuple(args, "iy*y*y*", &n, &ub, &vb, &wb))
        return NULL;

    PyObject *result = NULL;
    int *mate = NULL;

    if (n < 0 || ub.len % 4 != 0 || vb.len != ub.len ||
        wb.len != (ub.len / 4) * 8) {
        PyErr_SetString(PyExc_ValueError, "inconsistent edge array sizes");
        goto done;
    }
    int m = (int)(ub.len / 4);
    const int *eu = (const int *)ub.buf;
    const int *ev = (const int *)vb.buf;
    const long long *wraw = (const long long *)wb.buf;

    for (int k = 0; k < m; k++) {
        if (eu[k] < 0 || eu[k] >= n || ev[k] < 0 || ev[k] >= n ||
            eu[k] == ev[k]) {
            PyErr_SetString(PyExc_ValueError, "edge endpoint out of range");
            goto done;
        }
    }

    mate = (int *)malloc((size_t)(n > 0 ? n : 1) * sizeof(int));
    if (!mate) {
        PyErr_NoMemory();
        goto done;
    }

    int rc;
    Py_BEGIN_ALLOW_THREADS
    rc = solve_matching_arrays(n, m, eu, ev, wraw, mate);
    Py_END_ALLOW_THREADS

    if (rc == 2) {
        PyErr_NoMemory();
        goto done;
    }
    if (rc != 0) {
        PyErr_SetString(PyExc_RuntimeError,
                        "matching invariant violated during solve");
        goto done;
    }
    result = PyBytes_FromStringAndSize((const char *)mate,
                                       (Py_ssize_t)n * 4);

done:
    free(mate);
    PyBuffer_Release(&ub);
    PyBuffer_Release(&vb);
    PyBuffer_Release(&wb);
    return result;
}

/* Batch decoding core: for each shot, pair its defects (or match them to
 * the boundary) at exactly minimal total path weight, and XOR the logical
 * parities of the chosen paths. Mirrors the python reference decoder
 * including weight accumulation order and the gain quantization rule. */

#define GAIN_SCALE 4294967296.0 /* 2^32, matches matching.SCALE */

typedef struct {
    int *parent; /* union-find over shot defects */
    int *eu, *ev;
    long long *eq;
    int *comp_of;
    int *order;   /* defects grouped by component */
    int *cstart;  /* component offsets */
    int *local;   /* defect -> index within its component */
    int *ceu, *cev; /* per-component edge scratch */
    long long *ceq;
    int *mate;
    int *match; /* per-defect matched defect (local ids) or -1 */
    int cap_k, cap_e;
} Scratch;

static int uf_find(int *parent, int x)
{
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

static int decode_core(int nd, const double *dmin, const unsigned char *dpar,
                       const int *idx, const long long *off, long long shots,
                       Scratch *s, unsigned char *pred, double *weights,
                       long long *bad_shot, int *bad_det)
{
    long long stride = (long long)nd + 1;
    for (long long shot = 0; shot < shots; shot++) {
        const int *defs = idx + off[shot];
        int k = (int)(off[shot + 1] - off[shot]);
        double total = 0.0;
        int flip = 0;
        pred[shot] = 0;
        weights[shot] = 0.0;
        if (k == 0)
            continue;

        /* boundary reachability */
        for (int i = 0; i < k; i++) {
            double b = dmin[(long long)defs[i] * stride + nd];
            if (!(b < 1e308)) { /* inf or nan */
                *bad_shot = shot;
                *bad_det = defs[i];
                return 1;
            }
        }

        /* candidate edges: positive gain only */
        int ne = 0;
        for (int i = 0; i < k; i++)
            s->parent[i] = i;
        for (int i = 0; i < k; i++) {
            const double *row = dmin + (long long)defs[i] * stride;
            double bi = row[nd];
            for (int j = i + 1; j < k; j++) {
                double gain =
                    bi + dmin[(long long)defs[j] * stride + nd] - row[defs[j]];
                if (gain > 0.0) {
                    s->eu[ne] = i;
                    s->ev[ne] = j;
                    s->eq[ne] = (long long)llrint(gain * GAIN_SCALE);
                    ne++;
                    int ri = uf_find(s->parent, i);
                    int rj = uf_find(s->parent, j);
                    if (ri != rj)
                        s->parent[ri] = rj;
                }
            }
        }

        for (int i = 0; i < k; i++)
            s->match[i] = -1;

        if (ne > 0) {
            /* group defects by component, roots remapped to 0..nc-1 */
            int nc = 0;
            for (int i = 0; i < k; i++)
                s->comp_of[i] = -1;
            for (int i = 0; i < k; i++) {
                int r = uf_find(s->parent, i);
                if (s->comp_of[r] == -1)
                    s->comp_of[r] = nc++;
            }
            for (int i = 0; i <= nc; i++)
                s->cstart[i] = 0;
            for (int i = 0; i < k; i++)
                s->cstart[s->comp_of[uf_find(s->parent, i)] + 1]++;
            for (int c = 0; c < nc; c++)
                s->cstart[c + 1] += s->cstart[c];
            {
                int *fill = s->local; /* borrow as fill cursor */
                for (int c = 0; c < nc; c++)
                    fill[c] = s->cstart[c];
                for (int i = 0; i < k; i++) {
                    int c = s->comp_of[uf_find(s->parent, i)];
                    s->order[fill[c]++] = i;
                }
            }
            for (int c = 0; c < nc; c++)
                for (int x = s->cstart[c]; x < s->cstart[c + 1]; x++)
                    s->local[s->order[x]] = x - s->cstart[c];

            /* solve each nontrivial component */
            for (int c = 0; c < nc; c++) {
                int csize = s->cstart[c + 1] - s->cstart[c];
                if (csize < 2)
                    continue;
                int cne = 0;
                for (int e = 0; e < ne; e++) {
                    if (s->comp_of[uf_find(s->parent, s->eu[e])] != c)
                        continue;
                    s->ceu[cne] = s->local[s->eu[e]];
                    s->cev[cne] = s->local[s->ev[e]];
                    s->ceq[cne] = s->eq[e];
                    cne++;
                }
                if (csize == 2) {
                    int a = s->order[s->cstart[c]];
                    int b = s->order[s->cstart[c] + 1];
                    s->match[a] = b;
                    s->match[b] = a;
                    continue;
                }
                int rc = solve_matching_arrays(csize, cne, s->ceu, s->cev,
                                               s->ceq, s->mate);
                if (rc != 0)
                    return rc == 2 ? 2 : 3;
                for (int li = 0; li < csize; li++) {
                    int mi = s->mate[li];
                    if (mi >= 0) {
                        int gi = s->order[s->cstart[c] + li];
                        int gj = s->order[s->cstart[c] + mi];
                        s->match[gi] = gj;
                    }
                }
            }
        }

        /* accumulate in the same order as the python reference */
        for (int i = 0; i < k; i++) {
            int j = s->match[i];
            const double *row = dmin + (long long)defs[i] * stride;
            const unsigned char *prow =
                dpar + (long long)defs[i] * stride;
            if (j < 0) {
                total += row[nd];
                flip ^= prow[nd];
            } else if (j > i) {
                total += row[defs[j]];
                flip ^= prow[defs[j]];
            }
        }
        pred[shot] = (unsigned char)flip;
        weights[shot] = total;
    }
    return 0;
}

static PyObject *blossom_decode_shots(PyObject *self, PyObject *args)
{
    int nd;
    Py_buffer dminb, dparb, idxb, offb;
    if (!PyArg_ParseTuple(args, "iy*y*y*y*", &nd, &dminb, &dparb, &idxb,
                          &offb))
        return NULL;

    PyObject *result = NULL;
    Scratch s;
    memset(&s, 0, sizeof(s));
    unsigned char *pred = NULL;
    double *weights = NULL;

    long long stride = (long long)nd + 1;
    if (nd < 0 || dminb.len != stride * stride * 8 ||
        dparb.len != stride * stride || idxb.len % 4 != 0 ||
        offb.len % 8 != 0 || offb.len < 8) {
        PyErr_SetString(PyExc_ValueError, "inconsistent decode buffers");
        goto done;
    }
    long long shots = offb.len / 8 - 1;
    const double *dmin = (const double *)dminb.buf;
    const unsigned char *dpar = (const unsigned char *)dparb.buf;
    const int *idx = (const int *)idxb.buf;
    const long long *off = (const long long *)offb.buf;
    long long nidx = idxb.len / 4;

    if (off[0] != 0 || off[shots] != nidx) {
        PyErr_SetString(PyExc_ValueError, "offset array does not span index array");
        goto done;
    }
    int maxk = 0;
    for (long long t = 0; t < shots; t++) {
        long long kk = off[t + 1] - off[t];
        if (kk < 0 || kk > nd) {
            PyErr_SetString(PyExc_ValueError, "invalid defect offsets");
            goto done;
        }
        if (kk > maxk)
            maxk = (int)kk;
    }
    for (long long t = 0; t < nidx; t++) {
        if (idx[t] < 0 || idx[t] >= nd) {
            PyErr_SetString(PyExc_ValueError, "defect index out of range");
            goto done;
        }
    }

    long long maxe = (long long)maxk * (maxk - 1) / 2;
    s.cap_k = maxk > 0 ? maxk : 1;
    s.cap_e = maxe > 0 ? (int)maxe : 1;
    s.parent = (int *)malloc((size_t)s.cap_k * sizeof(int));
    s.eu = (int *)malloc((size_t)s.cap_e * sizeof(int));
    s.ev = (int *)malloc((size_t)s.cap_e * sizeof(int));
    s.eq = (long long *)malloc((size_t)s.cap_e * sizeof(long long));
    s.comp_of = (int *)malloc((size_t)s.cap_k * sizeof(int));
    s.order = (int *)malloc((size_t)s.cap_k * sizeof(int));
    s.cstart = (int *)malloc(((size_t)s.cap_k + 1) * sizeof(int));
    s.local = (int *)malloc((size_t)s.cap_k * sizeof(int));
    s.ceu = (int *)malloc((size_t)s.cap_e * sizeof(int));
    s.cev = (int *)malloc((size_t)s.cap_e * sizeof(int));
    s.ceq = (long long *)malloc((size_t)s.cap_e * sizeof(long long));
    s.mate = (int *)malloc((size_t)s.cap_k * sizeof(int));
    s.match = (int *)malloc((size_t)s.cap_k * sizeof(int));
    pred = (unsigned char *)malloc((size_t)(shots > 0 ? shots : 1));
    weights = (double *)malloc((size_t)(shots > 0 ? shots : 1) *
                               sizeof(double));
    if (!s.parent || !s.eu || !s.ev || !s.eq || !s.comp_of || !s.order ||
        !s.cstart || !s.local || !s.ceu || !s.cev || !s.ceq || !s.mate ||
        !s.match || !pred || !weights) {
        PyErr_NoMemory();
        goto done;
    }

    int rc;
    long long bad_shot = -1;
    int bad_det = -1;
    Py_BEGIN_ALLOW_THREADS
    rc = decode_core(nd, dmin, dpar, idx, off, shots, &s, pred, weights,
                     &bad_shot, &bad_det);
    Py_END_ALLOW_THREADS

    if (rc == 1) {
        PyErr_Format(PyExc_ValueError,
                     "defect at detector %d cannot reach the boundary "
                     "(shot %lld); graph is disconnected",
                     bad_det, bad_shot);
        goto done;
    }
    if (rc == 2) {
        PyErr_NoMemory();
        goto done;
    }
    if (rc != 0) {
        PyErr_SetString(PyExc_RuntimeError,
                        "matching invariant violated during decode");
        goto done;
    }

    result = Py_BuildValue("(y#y#)", (const char *)pred, (Py_ssize_t)shots,
                           (const char *)weights, (Py_ssize_t)(shots * 8));

done:
    free(s.parent);
    free(s.eu);
    free(s.ev);
    free(s.eq);
    free(s.comp_of);
    free(s.order);
    free(s.cstart);
    free(s.local);
    free(s.ceu);
    free(s.cev);
    free(s.ceq);
    free(s.mate);
    free(s.match);
    free(pred);
    free(weights);
    PyBuffer_Release(&dminb);
    PyBuffer_Release(&dparb);
    PyBuffer_Release(&idxb);
    PyBuffer_Release(&offb);
    return result;
}

static PyMethodDef blossom_methods[] = {
    {"solve", blossom_solve, METH_VARARGS,
     "solve(n, u_int32_bytes, v_int32_bytes, w_int64_bytes) -> mate int32 "
     "bytes. Max-weight matching; -1 marks exposed vertices."},
    {"decode_shots", blossom_decode_shots, METH_VARARGS,
     "decode_shots(n_det, dmin_f64_bytes, dpar_u8_bytes, idx_int32_bytes, "
     "off_int64_bytes) -> (pred_u8_bytes, weight_f64_bytes). Batch "
     "minimum-weight pairing of defects against an all-pairs distance "
     "table whose last row/column is the boundary."},
    {NULL, NULL, 0, NULL},
};

static struct PyModuleDef blossom_module = {
    PyModuleDef_HEAD_INIT,
    "_blossom",
    "Blossom-algorithm max-weight matching core.",
    -1,
    blossom_methods,
};

PyMODINIT_FUNC PyInit__blossom(void)
{
    return PyModule_Create(&blossom_module);
}
