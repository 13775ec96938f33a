"""pyhealth_like: the healthpipe pipeline as a six-step script.

    current_data = expdata_generator(exp_id="demo")
    current_data.get_exp_data(sel_task="mortality", data="events.csv")
    current_data.load_exp_data()
    model = LSTM(expmodel_id="demo.lstm", n_batchsize=20, use_gpu=True, n_epoch=100)
    model.fit(current_data.train, current_data.valid)
    model.load_model()
    model.inference(current_data.test)
    prediction_results = model.get_results()
    evaluation = evaluator(prediction_results["hat_y"], prediction_results["y"])
"""

__version__ = "0.1.0"

from pyhealth_like.workflow import GRU, LR, LSTM, TCNN, evaluator, expdata_generator

__all__ = [
    "GRU",
    "LR",
    "LSTM",
    "TCNN",
    "evaluator",
    "expdata_generator",
    "__version__",
]
