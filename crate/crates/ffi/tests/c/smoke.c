#include <stdio.h>
#include <string.h>

#include "qpke_sim.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            const char *err = qs_last_error();                        \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__,   \
                    #cond, err ? err : "no error");                   \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    QsRng *rng = qs_rng_new(42, 0);
    CHECK(rng != NULL);

    for (uint8_t m = 0; m < 2; m++) {
        QsEvKeyPair *kp = NULL;
        QsEvCiphertext *ct = NULL;
        uint8_t out = 9;
        CHECK(qs_ev_keygen(8, 8, rng, &kp) == QS_STATUS_OK);
        CHECK(qs_ev_encrypt(kp, m, rng, &ct) == QS_STATUS_OK);
        CHECK(qs_ev_ciphertext_is_abort(ct) == 0);
        CHECK(qs_ev_decrypt(kp, ct, &out) == QS_STATUS_OK);
        CHECK(out == m);
        qs_ev_ciphertext_free(ct);
        ct = NULL;
        CHECK(qs_ev_encrypt(kp, m, rng, &ct) == QS_STATUS_KEY_CONSUMED);
        CHECK(qs_last_error() != NULL);
        qs_ev_keypair_free(kp);
    }

    QsTranscript *t = NULL;
    CHECK(qs_qkd_session(2, 8, rng, &t) == QS_STATUS_OK);
    CHECK(qs_transcript_agree(t) == 1);
    char *alice = qs_transcript_outcome(t, QS_PARTY_ALICE);
    char *bob = qs_transcript_outcome(t, QS_PARTY_BOB);
    CHECK(strncmp(alice, "key ", 4) == 0);
    CHECK(strcmp(alice, bob) == 0);

    QsBuffer buf;
    CHECK(qs_transcript_encode(t, &buf) == QS_STATUS_OK);
    QsTranscript *back = NULL;
    CHECK(qs_transcript_decode(buf.data, buf.len, &back) == QS_STATUS_OK);
    char *bob2 = qs_transcript_outcome(back, QS_PARTY_BOB);
    CHECK(strcmp(bob, bob2) == 0);
    CHECK(qs_transcript_decode(buf.data, buf.len / 2, &back) == QS_STATUS_PARSE);

    qs_string_free(alice);
    qs_string_free(bob);
    qs_string_free(bob2);
    qs_buffer_free(buf);
    qs_transcript_free(back);
    qs_transcript_free(t);
    qs_rng_free(rng);
    printf("ok\n");
    return 0;
}
