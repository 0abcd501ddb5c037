"""Passphrase vault: authenticated encryption for sensitive files.

Envelope layout (binary, self-describing):

    magic   b"SOCVAULT1\\n"      format tag: scrypt + ChaCha20-Poly1305
    params  n(u32) r(u16) p(u16) scrypt cost parameters, big endian
    salt    16 bytes             fresh per encryption
    nonce   12 bytes             fresh per encryption
    body    AEAD ciphertext (includes the 16-byte tag)

Wrong passphrase and tampering are indistinguishable by design: both fail
authentication and raise the same error.
"""

from __future__ import annotations

import os
import struct

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.scrypt import Scrypt

from soccore.errors import SocError

MAGIC = b"SOCVAULT1\n"
_PARAMS = struct.Struct(">IHH")
SALT_LEN = 16
NONCE_LEN = 12

# interactive-grade default; tests may pass lighter parameters, the envelope
# records whatever was used so decryption is self-contained
DEFAULT_KDF = (2**14, 8, 1)


class VaultError(SocError):
    pass


class WrongPassphraseOrTampered(VaultError):
    def __init__(self):
        super().__init__("wrong passphrase or tampered vault file")


def _derive_key(passphrase: str, salt: bytes, n: int, r: int, p: int) -> bytes:
    # bounds keep a tampered header from demanding absurd KDF resources
    if not (2 <= n <= 2**22 and n & (n - 1) == 0 and 1 <= r <= 64 and 1 <= p <= 16):
        raise ValueError(f"implausible scrypt parameters n={n} r={r} p={p}")
    kdf = Scrypt(salt=salt, length=32, n=n, r=r, p=p)
    return kdf.derive(passphrase.encode("utf-8"))


def vault_encrypt(
    plaintext: bytes, passphrase: str, kdf_params: tuple[int, int, int] = DEFAULT_KDF
) -> bytes:
    if not passphrase:
        raise VaultError("passphrase must not be empty")
    n, r, p = kdf_params
    salt = os.urandom(SALT_LEN)
    nonce = os.urandom(NONCE_LEN)
    key = _derive_key(passphrase, salt, n, r, p)
    body = ChaCha20Poly1305(key).encrypt(nonce, plaintext, MAGIC)
    return MAGIC + _PARAMS.pack(n, r, p) + salt + nonce + body


def vault_decrypt(envelope: bytes, passphrase: str) -> bytes:
    if not passphrase:
        raise VaultError("passphrase must not be empty")
    header_len = len(MAGIC) + _PARAMS.size + SALT_LEN + NONCE_LEN
    if len(envelope) < header_len + 16 or not envelope.startswith(MAGIC):
        raise WrongPassphraseOrTampered()
    offset = len(MAGIC)
    n, r, p = _PARAMS.unpack_from(envelope, offset)
    offset += _PARAMS.size
    salt = envelope[offset : offset + SALT_LEN]
    offset += SALT_LEN
    nonce = envelope[offset : offset + NONCE_LEN]
    offset += NONCE_LEN
    body = envelope[offset:]
    try:
        key = _derive_key(passphrase, salt, n, r, p)
        return ChaCha20Poly1305(key).decrypt(nonce, body, MAGIC)
    except (InvalidTag, ValueError, MemoryError):
        raise WrongPassphraseOrTampered() from None
