from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    seed: int = 0
    threads: int = 1
    data_dir: str = "./data/results"
    fixtures_dir: str = "./data/fixtures"
    corpus_file: str = "./data/corpus.json"
    tol: float = 1e-8
    max_iter: int = 5000
    small_threshold: int = 64
    beta: float = 0.1
    gorder_window: int = 5
    spyplot_max_size: int = 1024
    log_level: str = "INFO"

    model_config = {"env_file": ".env", "env_file_encoding": "utf-8", "env_prefix": "DAGORDER_"}


settings = Settings()
