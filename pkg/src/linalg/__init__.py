from .qmath import (
    Matrix,
    NonHermitianError,
    NonUnitaryError,
    SVD2Result,
    as_operator,
    assert_unitary,
    dagger,
    expm_oracle,
    identity,
    is_hermitian,
    is_unitary,
    kron,
    on_first,
    on_second,
    pauli,
    spin_operators,
    svd2,
)
