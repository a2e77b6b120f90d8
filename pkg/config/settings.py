import os
from pathlib import Path
from dotenv import load_dotenv
from typing import List, Optional


class Settings:
    def __init__(self):
        self.base_dir = Path(__file__).parent
        self.active_profile = self._get_active_profile()
        self._load_environment_config()

    def _get_active_profile(self) -> str:
        profile = os.getenv('ACTIVE_PROFILE')
        if profile:
            return profile

        default_env_path = self.base_dir / 'default.env'
        if default_env_path.exists():
            load_dotenv(default_env_path)
            profile = os.getenv('ACTIVE_PROFILE')
            if profile:
                return profile

        return 'local'

    def _load_environment_config(self):
        env_file = self.base_dir / f'{self.active_profile}.env'

        if env_file.exists():
            load_dotenv(env_file)
        else:
            raise FileNotFoundError(f"환경 설정 파일을 찾을 수 없습니다: {env_file}")

    @property
    def log_level(self) -> str:
        level = os.getenv('LOG_LEVEL')
        if not level:
            raise ValueError(f"LOG_LEVEL이 설정되지 않았습니다. ({self.active_profile} 환경)")
        return level

    # 출력 경로 설정
    @property
    def output_dir(self) -> Path:
        """실험 산출물(데이터셋, 인코더, 결과 CSV) 기본 경로"""
        path = os.getenv('OUTPUT_DIR')
        if not path:
            raise ValueError(f"OUTPUT_DIR이 설정되지 않았습니다. ({self.active_profile} 환경)")
        return Path(path)

    @property
    def results_file_name(self) -> str:
        name = os.getenv('RESULTS_FILE_NAME')
        if not name:
            raise ValueError(f"RESULTS_FILE_NAME이 설정되지 않았습니다. ({self.active_profile} 환경)")
        return name

    @property
    def metrics_dir_name(self) -> str:
        name = os.getenv('METRICS_DIR_NAME')
        if not name:
            raise ValueError(f"METRICS_DIR_NAME이 설정되지 않았습니다. ({self.active_profile} 환경)")
        return name

    # 실행 설정
    @property
    def n_jobs(self) -> int:
        """시드/스윕 지점 병렬 실행 워커 수"""
        jobs = os.getenv('N_JOBS')
        if not jobs:
            raise ValueError(f"N_JOBS가 설정되지 않았습니다. ({self.active_profile} 환경)")
        return int(jobs)

    @property
    def default_seeds(self) -> List[int]:
        seeds = os.getenv('DEFAULT_SEEDS')
        if not seeds:
            raise ValueError(f"DEFAULT_SEEDS가 설정되지 않았습니다. ({self.active_profile} 환경)")
        return [int(seed.strip()) for seed in seeds.split(',')]

    def get_env(self, key: str, default: Optional[str] = None) -> Optional[str]:
        return os.getenv(key, default)

    def __str__(self):
        return f"Settings(profile={self.active_profile}, log_level={self.log_level})"
