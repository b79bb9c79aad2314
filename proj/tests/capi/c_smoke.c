/* Compiled as C to keep the header usable from C. */
#include <pcfgthresh/pcfgthresh.h>
#include <stdio.h>
#include <string.h>

int main(int argc, char** argv) {
  pt_parser* p = NULL;
  pt_result* r = NULL;
  int ok;
  if (argc != 2) return 2;
  if (pt_parser_open_grammar(argv[1], &p) != PT_OK) {
    fprintf(stderr, "%s\n", pt_last_error());
    return 1;
  }
  if (pt_parser_parse(p, "a b", &r) != PT_OK) {
    fprintf(stderr, "%s\n", pt_last_error());
    pt_parser_free(p);
    return 1;
  }
  ok = strcmp(pt_result_tree(r), "(S (A a) (B b))") == 0 && pt_result_entropy(r) == 0.0;
  printf("%s\n", pt_result_tree(r));
  pt_result_free(r);
  pt_parser_free(p);
  return ok ? 0 : 1;
}
