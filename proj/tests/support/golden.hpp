#pragma once

// Pinned digests. Regenerate only on an intentional format change, and bump
// the format version when doing so.

#define VALORI_GOLDEN_EMPTY_HASH "8fe7a85c391d4c45e4d4a96c7bc420d97266e902b3361864235e096ec1652baa"
#define VALORI_GOLDEN_TEN_HASH "9bce6c61a5879803b4f68d7883d7203336e43f628a4b189617d0bfad7843413e"
#define VALORI_GOLDEN_LOG_HASH "b4a691a3aba1ace77255e794537e9d08b2d314a48467e1d9c8296160051dbf0e"
