"""Train the pocket model on a small synthetic corpus and score held-out items.

Takes about a minute on one core.  The command-line equivalent is

    aasist3 make-toy-data --out toy --n 100 --seed 7
    aasist3 default-config --pocket > pocket.yaml
    aasist3 train --config pocket.yaml --data toy --out model.ckpt
    aasist3 score --ckpt model.ckpt --protocol toy/protocol_eval.txt --out scores.txt
    aasist3 eval --scores scores.txt --protocol toy/protocol_eval.txt
"""

import numpy as np

from aasist3.config import TrainConfig, pocket_model_config
from aasist3.model import Aasist3Model
from aasist3.train import evaluate_utterances, make_toy_dataset, split_dataset, train_loop

splits = split_dataset(make_toy_dataset(50, seed=7), seed=7)
print({name: len(items) for name, items in splits.items()})

model = Aasist3Model(pocket_model_config(seed=7))
print(f"{sum(p.size for p in model.parameters())} parameters, graph input {model.feature_shape}")


def show(record):
    print(f"epoch {record['epoch']:2d}  loss {record['loss']:.4f}  dev EER {100 * record['dev_eer']:5.1f}%"
          f"  ({record['seconds']:.1f} s)")


result = train_loop(model, splits["train"], TrainConfig(lr=1e-3, epochs=12, batch_size=8, seed=7),
                    splits["dev"], [show])
print("kept epoch", result.best_epoch)

held_out = evaluate_utterances(model, splits["eval"])
print(f"eval EER {100 * held_out['eer']:.2f}%  minDCF {held_out['min_dcf']:.4f}")
targets = np.array([u.target for u in splits["eval"]])
print("mean score bona fide", held_out["scores"][targets == 1].mean().round(3),
      "spoof", held_out["scores"][targets == 0].mean().round(3))
