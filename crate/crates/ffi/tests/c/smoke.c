#include <stdio.h>
#include <string.h>

#include "seatok.h"

/* argv: aab-vocab missing-path base target corpus out */
int main(int argc, char **argv) {
    if (argc != 7) {
        return 64;
    }
    SeatokVocab *vocab = NULL;
    if (seatok_vocab_load(argv[1], &vocab) != SEATOK_STATUS_OK) {
        fprintf(stderr, "load: %s\n", seatok_last_error_message());
        return 1;
    }
    printf("len %zu\n", seatok_vocab_len(vocab));

    const char *text = "aab";
    uint32_t *ids = NULL;
    size_t n = 0;
    if (seatok_encode(vocab, (const uint8_t *)text, strlen(text), &ids, &n) != SEATOK_STATUS_OK) {
        return 1;
    }
    printf("ids");
    for (size_t i = 0; i < n; i++) {
        printf(" %u", ids[i]);
    }
    printf("\n");

    char *decoded = NULL;
    size_t decoded_len = 0;
    if (seatok_decode(vocab, ids, n, &decoded, &decoded_len) != SEATOK_STATUS_OK) {
        return 1;
    }
    printf("decoded %s %zu\n", decoded, decoded_len);
    seatok_text_free(decoded, decoded_len);
    seatok_ids_free(ids, n);

    SeatokStatus st = seatok_encode(vocab, (const uint8_t *)"xyz", 3, &ids, &n);
    printf("unencodable %d %s\n", (int)st, seatok_last_error_code());

    SeatokVocab *missing = NULL;
    st = seatok_vocab_load(argv[2], &missing);
    printf("missing %d %s\n", (int)st, seatok_last_error_code());

    st = seatok_vocab_load(NULL, &missing);
    printf("null %d %s\n", (int)st, seatok_last_error_code());
    seatok_vocab_free(vocab);

    SeatokExtendSummary summary;
    st = seatok_extend(argv[3], argv[4], argv[5], 2, argv[6], &summary);
    printf("extend %d %zu %zu %zu\n", (int)st, summary.candidates, summary.kept, summary.vocab_size);
    return 0;
}
