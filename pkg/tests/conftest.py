import numpy as np
import pytest
import torch

torch.set_num_threads(1)


@pytest.fixture(scope="session")
def fixture_pairs():
    from lm2face.fixtures import generate_pairs

    return generate_pairs(8, seed=3)


@pytest.fixture(scope="session")
def fixture_checkpoint(tmp_path_factory, fixture_pairs):
    """A tiny trained checkpoint shared by service / CLI / synthesis tests."""
    from lm2face.losses import LossWeights
    from lm2face.training import TrainConfig, build_state, train_step, save_checkpoint

    cfg = TrainConfig(generator_preset="tiny", discriminator_preset="tiny",
                      weights=LossWeights(lambda_p=0, lambda_c=0, lambda_1=100),
                      batch_size=8, epochs=1, seed=5)
    state = build_state(cfg)
    for _ in range(30):
        train_step(state, fixture_pairs)
    state.epoch = 1
    path = tmp_path_factory.mktemp("ckpt") / "epoch_0001"
    save_checkpoint(state, path)
    return path


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.PCG64(1234))
