#include <stdio.h>
#include <string.h>
#include "unrest_filter.h"

#define CHECK(expr)                                                          \
  do {                                                                       \
    if (!(expr)) {                                                           \
      const char *e = uf_last_error();                                       \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #expr,        \
              e ? e : "no error");                                           \
      return 1;                                                              \
    }                                                                        \
  } while (0)

int main(int argc, char **argv) {
  char *json = NULL;
  CHECK(uf_normalize("a,b.c http://x.y", &json) == UF_STATUS_OK);
  CHECK(strcmp(json, "[\"a\",\"b\",\"c\",\"LINK\"]") == 0);
  uf_string_free(json);

  int32_t a[] = {1, 1, 0, 0, 1, 0};
  int32_t b[] = {1, 1, 0, 0, 0, 1};
  double k = 0;
  CHECK(uf_cohen_kappa(a, b, 6, &k) == UF_STATUS_OK);
  CHECK(k > 0.3333 && k < 0.3334);

  CHECK(uf_normalize(NULL, &json) == UF_STATUS_NULL_ARGUMENT);
  CHECK(uf_last_error() != NULL);

  if (argc == 3) {
    UfClassifier *c = NULL;
    CHECK(uf_classifier_load(argv[1], argv[2], &c) == UF_STATUS_OK);
    double s = 0;
    CHECK(uf_classifier_score_text(c, "rel001 rel002 rel003", &s) == UF_STATUS_OK);
    printf("%.17g\n", s);
    uf_classifier_free(c);
  }
  return 0;
}
