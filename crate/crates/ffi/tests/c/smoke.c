#include <math.h>
#include <stdio.h>
#include <string.h>

#include "tagmap.h"

#define CHECK(expr)                                                        \
    do {                                                                   \
        TagmapStatus st_ = (expr);                                         \
        if (st_ != TAGMAP_STATUS_OK) {                                     \
            fprintf(stderr, "%s -> %d: %s\n", #expr, (int)st_,             \
                    tagmap_last_error() ? tagmap_last_error() : "");       \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(int argc, char **argv) {
    if (argc != 3) {
        fprintf(stderr, "usage: smoke GRAPH KNOWN\n");
        return 2;
    }
    TagmapGraph *g = NULL;
    TagmapEmbeddings *known = NULL, *q = NULL;
    size_t uncovered = 99, iters = 0;

    CHECK(tagmap_graph_load(argv[1], NULL, &g));
    CHECK(tagmap_embeddings_load(argv[2], &known));
    CHECK(tagmap_uncovered_components(g, known, &uncovered));
    if (uncovered != 0) return 1;

    TagmapRetrofitParams p = tagmap_retrofit_params_default();
    p.tol = 1e-12;
    p.max_iter = 10000;
    CHECK(tagmap_retrofit(g, known, &p, &q, &iters));

    double v[2];
    CHECK(tagmap_embeddings_get(q, "x:b", v, 2));
    if (fabs(v[0] - 1.0) > 1e-9 || fabs(v[1]) > 1e-9) return 1;

    double scores[] = {0.9, 0.8, 0.3, 0.2};
    uint8_t labels[] = {1, 0, 1, 0};
    double auc = 0;
    bool defined = false;
    CHECK(tagmap_roc_auc(scores, labels, 4, &auc, &defined));
    if (!defined || auc != 0.75) return 1;

    if (tagmap_graph_load(NULL, NULL, &g) != TAGMAP_STATUS_NULL_ARGUMENT) return 1;

    tagmap_embeddings_free(q);
    tagmap_embeddings_free(known);
    tagmap_graph_free(g);
    printf("ok %s\n", tagmap_version());
    return 0;
}
