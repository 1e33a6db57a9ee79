/* oracle driver: "hash <file>..." prints sig per file; "cmp" reads pairs of sigs from stdin, prints score */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include "fuzzy.h"
int main(int argc, char **argv) {
  if (argc >= 2 && !strcmp(argv[1], "hash")) {
    for (int i = 2; i < argc; i++) {
      FILE *f = fopen(argv[i], "rb"); if (!f) return 2;
      char out[FUZZY_MAX_RESULT];
      if (fuzzy_hash_file(f, out) != 0) return 3;
      fclose(f); printf("%s\n", out);
    }
    return 0;
  }
  if (argc >= 2 && !strcmp(argv[1], "cmp")) {
    char a[512], b[512];
    while (fgets(a, sizeof a, stdin) && fgets(b, sizeof b, stdin)) {
      a[strcspn(a, "\n")] = 0; b[strcspn(b, "\n")] = 0;
      printf("%d\n", fuzzy_compare(a, b));
    }
    return 0;
  }
  return 1;
}
