from .settings import Settings

# 프로파일별 설정 싱글톤
settings = Settings()
